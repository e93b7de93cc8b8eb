#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

namespace piv::cli {

// Process exit statuses.
enum ExitCode : int {
    kOk = 0,
    kConfigError = 2,
    kDegenerate = 3,
    kIoError = 4,
    kVerifyFailed = 5,
};

struct Options {
    std::string config_path;
    std::string belief;
    std::optional<std::string> out;
    std::optional<std::string> format;
    std::optional<std::string> grid;
    std::uint64_t seed = 20050101;
    std::int64_t reps = 10'000;
    int seeds = 100;
    bool dump_config = false;
};

int compute(const Options& opts, std::ostream& out, std::ostream& err);
int bound(const Options& opts, std::ostream& out, std::ostream& err);
int contour(const Options& opts, std::ostream& out, std::ostream& err);
int power(const Options& opts, std::ostream& out, std::ostream& err);
int replicate(const Options& opts, std::ostream& out, std::ostream& err);
int verify(const Options& opts, std::ostream& out, std::ostream& err);

} // namespace piv::cli
