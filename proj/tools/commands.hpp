#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace acface::cli {

// Thrown for bad flag combinations detected after parsing; exit code 2.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Common {
  int threads = 1;
  std::uint64_t seed = 0;
};

struct GenSceneOptions {
  std::string out;
  std::string render;       // optional PGM path
  std::string size = "256x256";
  int k = 16;
  double detail = 0.5;
  double wavelength_min = 14.0;
  double wavelength_max = 20.0;
  std::vector<std::string> parts;
};

struct SynthOptions {
  std::string annotation;
  std::string out;
  double sigma = 2.0;
};

struct ContournessOptions {
  std::string in;
  std::string out;
  double sigma = 3.0;
  bool oracle = false;
  int n_theta = 720;
  int stride = 1;
};

struct ExtractOptions {
  std::string in;
  std::string out;
  std::string annotation;   // optional: anchor names come from here
  double sigma = 3.0;
  double anchor_sigma = 2.0;
  std::optional<double> high;
  std::optional<double> low;
  int min_trace_length = 3;
};

struct LossOptions {
  std::string pred;
  std::string annotation;
  std::string out;
  std::string mode = "full";
  double sigma = 2.0;
  double alpha = 10.0;
  int d_radius = 6;
  double lambda_landmark = 0.1;
  double lambda_line = 0.1;
  bool grad_check = false;
  int grad_pixels = 16;
};

struct EvalOptionsCli {
  std::vector<std::string> gt;
  std::vector<std::string> pred;
  std::string contours;     // "line" | "spline" | "" (use --pred)
  int k = 16;
  double cutoff = 6.0;
  std::vector<std::string> exclude;
  std::string ced;
  std::string out;
};

int cmd_gen_scene(const GenSceneOptions& o, const Common& c);
int cmd_synth(const SynthOptions& o, const Common& c);
int cmd_contourness(const ContournessOptions& o, const Common& c);
int cmd_extract(const ExtractOptions& o, const Common& c);
int cmd_loss(const LossOptions& o, const Common& c);
int cmd_eval(const EvalOptionsCli& o, const Common& c);

}  // namespace acface::cli
