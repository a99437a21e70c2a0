#pragma once

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "floquet/circuit.hpp"
#include "floquet/spectra.hpp"

namespace floquet {

// Unusable experiment description (malformed file, schema violation, invalid
// circuit, bad parameter). Commands map it to exit code 2.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// One experiment per config file. JSON schema (keys exactly as the fields):
//
//   {
//     "model": "circuit" | "noninteracting" | "single_cue",
//     "circuit": {                        // model == "circuit"
//       "dimension": int, "linear_size": int, "local_dim": int,
//       "boundary": "open" | "periodic",
//       "ordering": "brickwork" | "staircase" | "random",  // generated form
//       "ordering_seed": u64,                              // random only
//       "bonds": [{"a": [..], "b": [..], "substep": int}, ...],  // explicit
//       "gate_order": [int, ...]                                 // form
//     },
//     "noninteracting": {"local_dim": int, "linear_size": int},
//     "single_cue": {"dim": int},
//     "t_list": [int, ...],               // required, non-empty
//     "n_samples": int >= 2,              // required
//     "master_seed": u64,                 // default 0
//     "workers": int,                     // default 0 = env/hardware
//     "bins": int >= 1,                   // default 64
//     "output_dir": string                // default "."
//   }
//
// A circuit section carries either the generated form ("ordering") or the
// explicit form ("bonds" + "gate_order"), not both.
struct ExperimentConfig {
    enum class Model { circuit, noninteracting, single_cue };

    Model model = Model::single_cue;
    CircuitSpec circuit;
    int noninteracting_q = 2;
    int noninteracting_l = 1;
    std::size_t single_cue_dim = 2;

    std::vector<long long> t_list;
    std::size_t n_samples = 2;
    std::uint64_t master_seed = 0;
    std::size_t workers = 0;
    std::size_t bins = 64;
    std::string output_dir = ".";
};

ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig load_config(const std::string& path);

// The model named by the config; throws ConfigError when the circuit section
// fails validation.
EnsembleModel model_from_config(const ExperimentConfig& cfg);

// Ensemble SFF sweep over t_list; writes <output_dir>/sff.csv with columns
// t,mean,stderr,n,prediction,z (17-significant-digit floats; prediction/z
// empty where no closed form applies). Predictions: min(|t|,N) for single_cue,
// min(|t|,q)^L for noninteracting, and the exact channel contraction at
// |t| = 1 for circuits. Returns 0 iff every |z| <= 5 where predictions exist.
// With plot, also writes sff.svg (never affects the return value).
int run_sff(const ExperimentConfig& cfg, bool plot, std::ostream& log);

// Two-level correlation histogram; writes <output_dir>/r2.csv with columns
// bin_lo,bin_hi,center,density,stderr,n,cue_prediction,sigma_prediction,z.
// cue_prediction is the bin average of the exact CUE formula (the pointwise
// formula oscillates within a bin); sigma_prediction is the smoothed formula
// at the bin center, reported for comparison. z gates against cue_prediction
// for single_cue only — for circuit and noninteracting models finite-q
// deviations from CUE are expected physics, so their rows carry predictions
// but the run is report-only. With plot, also writes r2.svg.
int run_r2(const ExperimentConfig& cfg, bool plot, std::ostream& log);

// Named verification suite: weingarten | moments | ordering | asymptotics.
// Prints one "PASS <check>" / "FAIL <check>: <details>" line per check;
// returns 0 iff all pass. Unknown suite -> ConfigError.
int run_verify(const std::string& suite, std::ostream& out);

// Solves the Weingarten table and serializes it to <out_dir>/wg_table.txt.
// max_p > q propagates the solver's domain error (config error at the CLI).
int run_wg_table(int q, int max_p, const std::string& out_dir, std::ostream& log);

// Prints every violated CircuitSpec invariant (or "ok"); returns 0 iff valid.
// Requires a circuit-model config.
int run_validate_circuit(const ExperimentConfig& cfg, std::ostream& out);

}  // namespace floquet
