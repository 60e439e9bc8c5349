// acface: heatmap synthesis, contourness, extraction, losses and evaluation.
// Exit codes: 0 success, 1 computation or contract failure, 2 usage error.

#include "commands.hpp"

#include <CLI11.hpp>

#include <functional>
#include <iostream>

namespace cli = acface::cli;

int main(int argc, char** argv) {
  CLI::App app{"Anchor and contour heatmap tools"};
  app.require_subcommand(1);
  app.fallthrough();
  cli::Common common;
  app.add_option("--threads", common.threads, "Worker threads (0 = all cores)")->check(CLI::NonNegativeNumber);
  app.add_option("--seed", common.seed, "Random seed");

  std::function<int()> run;

  cli::GenSceneOptions gen;
  auto* g = app.add_subcommand("gen-scene", "Generate a procedural face scene annotation");
  g->add_option("--out", gen.out, "Annotation JSON path")->required();
  g->add_option("--render", gen.render, "Also write a 16-bit PGM rendering");
  g->add_option("--size", gen.size, "Raster size WIDTHxHEIGHT")->capture_default_str();
  g->add_option("--k", gen.k, "Sparse landmarks per contour")->capture_default_str();
  g->add_option("--detail", gen.detail, "Contour ripple amplitude in px")->capture_default_str();
  g->add_option("--wavelength-min", gen.wavelength_min, "Shortest ripple wavelength in px")->capture_default_str();
  g->add_option("--wavelength-max", gen.wavelength_max, "Longest ripple wavelength in px")->capture_default_str();
  g->add_option("--parts", gen.parts, "Anchor/contour names to emit (default all)")->delimiter(',');
  g->callback([&] { run = [&] { return cli::cmd_gen_scene(gen, common); }; });

  cli::SynthOptions syn;
  auto* s = app.add_subcommand("synth", "Synthesize a heatmap stack from an annotation");
  s->add_option("--annotation,-a", syn.annotation, "Annotation JSON")->required();
  s->add_option("--out", syn.out, "Output ACH path")->required();
  s->add_option("--sigma", syn.sigma, "Heatmap sigma")->capture_default_str()->check(CLI::PositiveNumber);
  s->callback([&] { run = [&] { return cli::cmd_synth(syn, common); }; });

  cli::ContournessOptions con;
  auto* c = app.add_subcommand("contourness", "Contourness, orientation and normal maps per channel");
  c->add_option("--in", con.in, "Input ACH")->required();
  c->add_option("--out", con.out, "Output ACH (name:C, name:O, name:N, name:V per channel)")->required();
  c->add_option("--sigma", con.sigma, "Template sigma")->capture_default_str()->check(CLI::PositiveNumber);
  c->add_flag("--oracle", con.oracle, "Brute-force orientation sweep instead of the closed form");
  c->add_option("--n-theta", con.n_theta, "Orientations for --oracle")->capture_default_str();
  c->add_option("--stride", con.stride, "Evaluate --oracle on every stride-th pixel")->capture_default_str();
  c->callback([&] { run = [&] { return cli::cmd_contourness(con, common); }; });

  cli::ExtractOptions ext;
  auto* e = app.add_subcommand("extract", "Extract anchors and contour traces from heatmaps");
  e->add_option("--in", ext.in, "Input ACH")->required();
  e->add_option("--out", ext.out, "Trace JSON path (default standard output)");
  e->add_option("--annotation", ext.annotation, "Take anchor channel names from this annotation");
  e->add_option("--sigma", ext.sigma, "Contourness sigma")->capture_default_str()->check(CLI::PositiveNumber);
  e->add_option("--anchor-sigma", ext.anchor_sigma, "Anchor centroid radius")->capture_default_str()->check(CLI::PositiveNumber);
  e->add_option("--high", ext.high, "High threshold (default 0.5 C_max)");
  e->add_option("--low", ext.low, "Low threshold (default 0.25 C_max)");
  e->add_option("--min-length", ext.min_trace_length, "Shortest trace kept, in points")->capture_default_str();
  e->callback([&] { run = [&] { return cli::cmd_extract(ext, common); }; });

  cli::LossOptions los;
  auto* l = app.add_subcommand("loss", "Full or weakly supervised loss of a predicted stack");
  l->add_option("--pred", los.pred, "Predicted ACH")->required();
  l->add_option("--annotation,-a", los.annotation, "Ground-truth annotation")->required();
  l->add_option("--out", los.out, "Loss JSON path (default standard output)");
  l->add_option("--mode", los.mode, "full | weak")->capture_default_str();
  l->add_option("--sigma", los.sigma, "Heatmap sigma")->capture_default_str()->check(CLI::PositiveNumber);
  l->add_option("--alpha", los.alpha, "Hard-example weight")->capture_default_str();
  l->add_option("--d-radius", los.d_radius, "Far-region distance D")->capture_default_str();
  l->add_option("--lambda-landmark", los.lambda_landmark, "Landmark term weight")->capture_default_str();
  l->add_option("--lambda-line", los.lambda_line, "Line term weight")->capture_default_str();
  l->add_flag("--grad-check", los.grad_check, "Finite-difference check of the gradients; exit 1 on failure");
  l->add_option("--grad-pixels", los.grad_pixels, "Pixels checked per channel and term")->capture_default_str();
  l->callback([&] { run = [&] { return cli::cmd_loss(los, common); }; });

  cli::EvalOptionsCli ev;
  auto* v = app.add_subcommand("eval", "NME and CED/AUC against ground-truth annotations");
  v->add_option("--gt", ev.gt, "Ground-truth annotation (repeatable)")->required();
  v->add_option("--pred", ev.pred, "Prediction: trace JSON or annotation (one per --gt)");
  v->add_option("--contours", ev.contours, "Evaluate sparse-landmark baselines: line | spline");
  v->add_option("--k", ev.k, "Landmarks per contour for --contours")->capture_default_str();
  v->add_option("--cutoff", ev.cutoff, "CED cutoff, percent")->capture_default_str()->check(CLI::PositiveNumber);
  v->add_option("--exclude", ev.exclude, "Landmark owners or part tags to skip")->delimiter(',');
  v->add_option("--ced", ev.ced, "Write the CED as CSV");
  v->add_option("--out", ev.out, "Report JSON path (default standard output)");
  v->callback([&] { run = [&] { return cli::cmd_eval(ev, common); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& err) {
    return app.exit(err);
  } catch (const CLI::CallForAllHelp& err) {
    return app.exit(err);
  } catch (const CLI::ParseError& err) {
    app.exit(err);
    return 2;
  }

  try {
    return run();
  } catch (const cli::UsageError& err) {
    std::cerr << "usage error: " << err.what() << "\n";
    return 2;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 1;
  }
}
