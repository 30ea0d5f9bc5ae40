#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "lorentzfk/error.hpp"
#include "lorentzfk/harness/config.hpp"

namespace lfk::harness {

/// CLI exit status for success and each failure class.
enum class ExitStatus : int { Ok = 0, ConfigInvalid = 2, GuardExceeded = 3, NumericalFailure = 4, IoFailure = 5 };

ExitStatus exit_status_for(ErrorCode code) noexcept;

/// git-style blob hash: sha1("blob <size>\0" + content), lower-case hex.
std::string content_hash(const std::string& content);

/// Files of a stage are written with a ".partial" suffix and renamed when the
/// stage commits.
class OutputDir {
 public:
  explicit OutputDir(std::filesystem::path root);

  /// Throws IoFailure.
  void write(const std::string& name, const std::string& content);
  void commit();

  struct Record {
    std::string name;
    std::string hash;
    std::size_t bytes = 0;
  };
  const std::vector<Record>& committed() const noexcept { return committed_; }
  const std::filesystem::path& root() const noexcept { return root_; }

 private:
  std::filesystem::path root_;
  std::vector<Record> pending_;
  std::vector<Record> committed_;
};

struct RunOptions {
  std::filesystem::path output_dir = "lorentzfk-out";
  std::optional<std::uint64_t> seed;
  /// Worker cap (LORENTZFK_THREADS); part of the reproducibility key.
  std::size_t workers = 1;
  std::string config_hash;
};

struct RunResult {
  ExitStatus status = ExitStatus::Ok;
  std::string message;
};

/// Parses, validates and runs one subcommand; always writes manifest.json.
RunResult run(Subcommand sub, const std::string& config_text, const RunOptions& options);

/// Workers from LORENTZFK_THREADS (unset or invalid: hardware concurrency).
std::size_t workers_from_env();

}  // namespace lfk::harness
