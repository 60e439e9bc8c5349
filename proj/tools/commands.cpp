#include "commands.hpp"

#include <acface/acface.hpp>

#include <cstdio>
#include <iostream>
#include <numbers>
#include <set>

namespace acface::cli {
namespace {

void emit(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-")
    std::cout << text;
  else
    write_text_file(path, text);
}

Size2 parse_size(const std::string& s) {
  int w = 0, h = 0;
  char x = 0, extra = 0;
  if (std::sscanf(s.c_str(), "%d%c%d%c", &w, &x, &h, &extra) != 3 || (x != 'x' && x != 'X') || w < 1 || h < 1)
    throw UsageError("--size must look like WIDTHxHEIGHT, got '" + s + "'");
  return {w, h};
}

// Anchor channel names: from the annotation when given, else the face schema.
std::set<std::string> anchor_names(const std::string& annotation_path) {
  std::set<std::string> names;
  if (!annotation_path.empty())
    for (const auto& a : read_annotation(annotation_path).anchors) names.insert(a.name);
  else
    names.insert(schema::anchor_names().begin(), schema::anchor_names().end());
  return names;
}

Grid<double> to_double(const Heatmap& h) { return h.cast<double>(); }

// Pixels for a finite-difference spot check: nonzero analytic gradient and at
// least two steps away from the kinks at pred = 0 and |H - pred| = H, evenly
// spread over the candidates in row-major order.
std::vector<std::size_t> pick_check_pixels(const Grid<double>& analytic, const Grid<double>& pred,
                                           const Grid<double>* gt, double step, int count) {
  std::vector<std::size_t> cand;
  for (std::size_t i = 0; i < analytic.size(); ++i) {
    if (std::abs(analytic.data()[i]) <= 1e-6) continue;
    const double p = pred.data()[i];
    if (std::abs(p) < 2.0 * step) continue;
    if (gt) {
      const double h = gt->data()[i];
      if (std::abs(std::abs(h - p) - h) < 2.0 * step || std::abs(h - p) < 2.0 * step) continue;
    }
    cand.push_back(i);
  }
  if (static_cast<int>(cand.size()) <= count) return cand;
  std::vector<std::size_t> out;
  for (int k = 0; k < count; ++k) out.push_back(cand[cand.size() * static_cast<std::size_t>(k) / count]);
  return out;
}

json check_json(const GradientCheck& g) {
  return {{"max_relative_error", round9(g.max_relative_error)},
          {"pixels_checked", g.pixels_checked},
          {"passed", g.passed}};
}

}  // namespace

int cmd_gen_scene(const GenSceneOptions& o, const Common& c) {
  SceneSpec spec;
  spec.seed = c.seed;
  spec.image_size = parse_size(o.size);
  spec.landmarks_per_contour = o.k;
  spec.jitter.detail = o.detail;
  spec.jitter.wavelength_min = o.wavelength_min;
  spec.jitter.wavelength_max = o.wavelength_max;
  spec.parts = o.parts;
  const SceneGT scene = gen_scene(spec);
  write_annotation(o.out, scene.annotation);
  if (!o.render.empty()) export_pgm(render_scene(scene.annotation), o.render);
  return 0;
}

int cmd_synth(const SynthOptions& o, const Common& c) {
  const Annotation a = read_annotation(o.annotation);
  const Sigma sigma(o.sigma);
  const std::size_t na = a.anchors.size();
  std::vector<Heatmap> channels(na + a.contours.size());
  parallel_for(channels.size(), c.threads, [&](std::size_t i) {
    channels[i] = i < na ? synth_anchor_heatmap(a.anchors[i].point, sigma, a.image_size)
                         : synth_contour_heatmap(a.contours[i - na].contour, sigma, a.image_size);
  });
  HeatmapStack s;
  for (std::size_t i = 0; i < channels.size(); ++i)
    s.add(i < na ? a.anchors[i].name : a.contours[i - na].name, std::move(channels[i]));
  write_ach(o.out, s);
  return 0;
}

int cmd_contourness(const ContournessOptions& o, const Common& c) {
  if (o.stride < 1) throw UsageError("--stride must be >= 1");
  if (o.n_theta < 2) throw UsageError("--n-theta must be >= 2");
  const HeatmapStack in = read_ach(o.in);
  const Sigma sigma(o.sigma);
  const FilterBank bank = build_filter_bank(sigma);
  struct Out {
    Heatmap c, o, n, v;
  };
  std::vector<Out> outs(in.size());
  parallel_for(in.size(), c.threads, [&](std::size_t k) {
    const Heatmap& h = in[k];
    const ContournessMaps m = contourness_maps(h, bank);
    Out r{m.c.cast<float>(), m.o.cast<float>(), m.n.cast<float>(), m.valid.cast<float>()};
    if (o.oracle) {
      r.c = Heatmap(h.width(), h.height(), 0.0f);
      r.o = r.c;
      r.n = r.c;
      r.v = r.c;
      for (int y = 0; y < h.height(); y += o.stride)
        for (int x = 0; x < h.width(); x += o.stride) {
          if (!m.valid(x, y)) continue;
          double best = -std::numeric_limits<double>::infinity(), best_theta = 0.0;
          for (int t = 0; t < o.n_theta; ++t) {
            const double theta = std::numbers::pi * t / o.n_theta;
            const double v = contourness_objective(h, x, y, sigma, theta);
            if (v > best) {
              best = v;
              best_theta = theta;
            }
          }
          const double orient = best_theta >= std::numbers::pi / 2 ? best_theta - std::numbers::pi : best_theta;
          r.c(x, y) = static_cast<float>(best);
          r.o(x, y) = static_cast<float>(orient);
          r.n(x, y) = static_cast<float>(orient + std::numbers::pi / 2);
          r.v(x, y) = 1.0f;
        }
    }
    outs[k] = std::move(r);
  });
  HeatmapStack s;
  for (std::size_t k = 0; k < in.size(); ++k) {
    const std::string& n = in.names()[k];
    s.add(n + ":C", std::move(outs[k].c));
    s.add(n + ":O", std::move(outs[k].o));
    s.add(n + ":N", std::move(outs[k].n));
    s.add(n + ":V", std::move(outs[k].v));
  }
  write_ach(o.out, s);
  return 0;
}

int cmd_extract(const ExtractOptions& o, const Common& c) {
  ExtractionParams params = ExtractionParams::defaults(o.sigma);
  if (o.high) params.high_threshold = *o.high;
  if (o.low) params.low_threshold = *o.low;
  params.min_trace_length = o.min_trace_length;
  params.validate();
  const HeatmapStack in = read_ach(o.in);
  const auto anchors = anchor_names(o.annotation);

  std::vector<std::optional<Point2>> points(in.size());
  std::vector<std::vector<ContourTrace>> traces(in.size());
  parallel_for(in.size(), c.threads, [&](std::size_t k) {
    const Heatmap& h = in[k];
    if (anchors.count(in.names()[k])) {
      const bool any = std::any_of(h.data().begin(), h.data().end(), [](float v) { return v > 0.0f; });
      if (any) points[k] = extract_anchor(h, Sigma(o.anchor_sigma));
    } else {
      traces[k] = extract_contour(h, params);
    }
  });

  TraceDoc doc;
  doc.params = params;
  doc.anchor_sigma = o.anchor_sigma;
  for (std::size_t k = 0; k < in.size(); ++k) {
    const std::string& n = in.names()[k];
    if (anchors.count(n)) {
      if (points[k])
        doc.anchors.push_back({n, *points[k]});
      else
        std::cerr << "extract: no anchor found in channel '" << n << "'\n";
    } else {
      doc.channels.push_back({n, std::move(traces[k])});
    }
  }
  emit(o.out, dump_json(trace_doc_to_json(doc)));
  return 0;
}

int cmd_loss(const LossOptions& o, const Common& c) {
  if (o.mode != "full" && o.mode != "weak") throw UsageError("--mode must be 'full' or 'weak'");
  const Annotation a = read_annotation(o.annotation);
  const HeatmapStack pred = read_ach(o.pred);
  const Sigma sigma(o.sigma);
  LossWeights weights = LossWeights::defaults(sigma);
  weights.alpha = o.alpha;
  weights.d_radius = o.d_radius;
  weights.lambda_landmark = o.lambda_landmark;
  weights.lambda_line = o.lambda_line;
  weights.validate();
  if (pred.width() != a.image_size.width || pred.height() != a.image_size.height)
    throw std::invalid_argument("prediction raster size does not match the annotation");

  auto pred_channel = [&](const std::string& n) -> const Heatmap& { return pred[pred.index_of(n)]; };
  const double step = 1e-3;
  bool checks_ok = true;
  json out;
  out["mode"] = o.mode;
  out["params"] = {{"sigma", round9(o.sigma)},
                   {"alpha", round9(weights.alpha)},
                   {"d_radius", weights.d_radius},
                   {"lambda_landmark", round9(weights.lambda_landmark)},
                   {"lambda_line", round9(weights.lambda_line)}};

  // Full loss over the given channels of the synthesized ground truth.
  auto full_over = [&](const std::vector<std::string>& names, const char* key) {
    if (names.empty()) return;
    HeatmapStack gt_all = synthesize(a, sigma), gt, p;
    for (const auto& n : names) {
      gt.add(n, gt_all[gt_all.index_of(n)]);
      p.add(n, pred_channel(n));
    }
    out[key] = round9(full_loss(gt, p, weights.alpha));
    if (o.grad_check) {
      json checks = json::object();
      for (const auto& n : names) {
        LossProblem prob{to_double(gt[gt.index_of(n)]), WeakSupervision{}, o.sigma, weights};
        const Grid<double> pd = to_double(p[p.index_of(n)]);
        const auto analytic = loss_gradient(LossKind::full, pd, prob);
        const auto px = pick_check_pixels(analytic, pd, &prob.gt, step, o.grad_pixels);
        const auto g = check_gradient(LossKind::full, pd, prob, step, 1e-3, 1e-6, px);
        checks_ok = checks_ok && g.passed;
        checks[n] = check_json(g);
      }
      out[std::string(key) + "_grad_check"] = checks;
    }
  };

  std::vector<std::string> anchor_list, contour_list;
  for (const auto& an : a.anchors) anchor_list.push_back(an.name);
  for (const auto& cn : a.contours) contour_list.push_back(cn.name);

  if (o.mode == "full") {
    std::vector<std::string> all = anchor_list;
    all.insert(all.end(), contour_list.begin(), contour_list.end());
    full_over(all, "full");
  } else {
    if (a.landmarks.empty()) throw std::invalid_argument("weak mode needs sparse landmarks in the annotation");
    std::vector<std::string> names;
    for (const auto& g : a.landmarks) names.push_back(g.name);
    std::vector<WeakLossBreakdown> res(names.size());
    std::vector<json> checks(names.size());
    parallel_for(names.size(), c.threads, [&](std::size_t i) {
      const auto& group = a.landmark_group(names[i]);
      const auto sup = WeakSupervision::from_landmarks(LandmarkChain(group.points, a.contour(names[i]).closed()));
      const Grid<double> pd = to_double(pred_channel(names[i]));
      res[i] = weak_loss(pd, sup, sigma, weights, false);
      if (o.grad_check) {
        const LossProblem prob{Grid<double>{}, sup, o.sigma, weights};
        json per = json::object();
        for (LossKind k : {LossKind::far, LossKind::landmark, LossKind::line, LossKind::weak_total}) {
          const auto analytic = loss_gradient(k, pd, prob);
          const auto px = pick_check_pixels(analytic, pd, nullptr, step, o.grad_pixels);
          per[to_string(k)] = check_json(check_gradient(k, pd, prob, step, 1e-3, 1e-6, px));
        }
        checks[i] = per;
      }
    });
    json per = json::object();
    double sum = 0.0;
    for (std::size_t i = 0; i < names.size(); ++i) {
      per[names[i]] = {{"total", round9(res[i].total)},
                       {"far", round9(res[i].far)},
                       {"landmark", round9(res[i].landmark)},
                       {"line", round9(res[i].line)}};
      sum += res[i].total;
      if (o.grad_check) {
        per[names[i]]["grad_check"] = checks[i];
        for (const auto& [k, v] : checks[i].items()) checks_ok = checks_ok && v.at("passed").get<bool>();
      }
    }
    out["contours"] = per;
    out["weak_mean"] = round9(sum / static_cast<double>(names.size()));
    full_over(anchor_list, "anchors_full");
  }
  if (o.grad_check) out["grad_check_passed"] = checks_ok;
  emit(o.out, dump_json(out));
  if (!checks_ok) {
    std::cerr << "loss: gradient check failed\n";
    return 1;
  }
  return 0;
}

int cmd_eval(const EvalOptionsCli& o, const Common&) {
  if (o.gt.empty()) throw UsageError("at least one --gt annotation is required");
  if (o.contours.empty() && o.pred.size() != o.gt.size())
    throw UsageError("give one --pred per --gt, or --contours line|spline");
  if (!o.contours.empty() && o.contours != "line" && o.contours != "spline")
    throw UsageError("--contours must be 'line' or 'spline'");
  if (!o.contours.empty() && !o.pred.empty()) throw UsageError("--pred and --contours are mutually exclusive");
  if (o.k < 3 && o.contours == "spline") throw UsageError("--k must be >= 3 for spline contours");
  if (o.k < 2) throw UsageError("--k must be >= 2");

  std::vector<GroundTruthLandmarks> gts;
  std::vector<Prediction> preds;
  for (std::size_t i = 0; i < o.gt.size(); ++i) {
    const Annotation a = read_annotation(o.gt[i]);
    gts.push_back(to_ground_truth(a));
    if (o.contours.empty()) {
      preds.push_back(prediction_from_json(parse_json(read_text_file(o.pred[i]))));
      continue;
    }
    // Sparse-landmark baselines: exact anchors, contours rebuilt from k
    // landmarks sampled uniformly along each dense contour.
    Prediction p;
    for (const auto& an : a.anchors) p.anchors[an.name] = an.point;
    for (const auto& cn : a.contours) {
      const LandmarkChain chain = sample_landmarks(cn.contour, o.k);
      p.contours[cn.name] = {o.contours == "line" ? line_contour(chain) : spline_contour(chain)};
    }
    preds.push_back(std::move(p));
  }
  EvalOptions opt;
  opt.cutoff = o.cutoff;
  opt.exclude.insert(o.exclude.begin(), o.exclude.end());
  const EvalReport rep = evaluate(gts, preds, opt);
  for (const auto& f : rep.faces)
    for (const auto& m : f.missing) std::cerr << "eval: no prediction for '" << m << "', charged the cutoff error\n";
  emit(o.out, dump_json(eval_report_to_json(rep)));
  if (!o.ced.empty()) write_text_file(o.ced, ced_csv(rep.curve));
  return 0;
}

}  // namespace acface::cli
