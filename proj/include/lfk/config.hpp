#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "lfk/pide.hpp"
#include "lfk/problem.hpp"

namespace lfk {

enum class OutputFormat { Csv, Json, Bin };

struct FkMethod {
    std::vector<double> eval_points;
    std::optional<double> eval_time; // defaults to the problem horizon
};

struct PideMethod {
    PideGrid grid;
};

enum class VariationalMode { Config, Momentum, Jump };
struct VariationalMethod {
    VariationalMode mode = VariationalMode::Config;
    double location = 0.0; // q (config) or p (momentum/jump)
    double interval = 1.0; // window length (config/momentum)
    double kappa = 0.5;
    double t_start = 0.0;  // jump mode
};

enum class AsymptoticsMode { Prefactor, DriftConfig, DriftMomentum, Sweep };
struct AsymptoticsMethod {
    AsymptoticsMode mode = AsymptoticsMode::Sweep;
    std::vector<double> times;   // prefactor mode
    bool backward = false;       // prefactor mode
    std::vector<double> hbars;   // sweep ladder
    double eval_point = 0.0;
    double eval_time = 0.0;
    bool mc_source = false;      // sweep: Monte Carlo instead of the grid solver
    double location = 0.0;       // drift modes: q resp. p
    double interval = 0.5;
    double kappa = 0.5;
    double dp = 0.0;             // drift modes: finite-difference width (0 = skip MC)
};

struct RunConfig {
    uint64_t seed = 1;
    ProblemSpec problem;
    std::string method_name; // fk | pide | variational | asymptotics
    FkMethod fk;
    PideMethod pide;
    VariationalMethod variational;
    AsymptoticsMethod asymptotics;
    MCParams mc;
    OutputFormat format = OutputFormat::Csv;
    std::string out_path;

    std::string canonical_json() const; // resolved config, sorted keys
    uint64_t config_hash() const;
    uint64_t model_hash() const;
};

// Parses and validates a config file (JSON; unknown keys rejected).
RunConfig load_config(const std::string& path);
RunConfig parse_config(const std::string& text);

uint64_t fnv1a64(const std::string& bytes);

} // namespace lfk
