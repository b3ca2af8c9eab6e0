#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "effdyn/config.hpp"
#include "effdyn/error.hpp"

namespace effdyn {

inline constexpr const char* kVersion = "0.1.0";

struct RunOptions {
  std::filesystem::path out_dir = ".";
  int threads = 0;             // FFTW threads; 0 = hardware concurrency
  std::string raw_config;      // bytes of the config file, hashed into the manifest
  std::function<void(const std::string&)> log;  // progress and warnings; may be empty
};

struct RunSummary {
  std::vector<std::string> files;  // relative to out_dir, in write order
  double wall_seconds = 0.0;
  std::vector<std::string> warnings;
};

/// Runs the configured command and writes its artifacts (CSV, snapshots,
/// gnuplot script, resolved config, manifest.json) into out_dir. Nothing is
/// written until every artifact is ready; files are staged under temporary
/// names and renamed, so a failure leaves no partial files. The one exception
/// is an incomplete convergence study, whose partial report is written before
/// the failure is rethrown.
RunSummary run(const RunConfig& cfg, const RunOptions& opts);

/// Process exit status for a failure class; 0 is success, 2 is reserved for
/// command-line usage errors and 1 for unexpected failures.
int exit_code(ErrorCategory c) noexcept;

/// Little-endian f64 (re, im) pairs.
std::string encode_field(std::span<const cplx> values);

/// Header (uint64 M, uint64 N, f64 L, f64 t) followed by the amplitudes.
std::string encode_nbody(const NBodyState& psi, double t);

struct DecodedNBody {
  NBodyState state;
  double time;
};
DecodedNBody decode_nbody(std::string_view bytes);

}  // namespace effdyn
