// End to end on one generated scene: synthesize heatmaps, extract anchors
// and contours back, and score them against the dense ground truth next to
// the sparse-landmark baselines.

#include <acface/acface.hpp>

#include <cstdio>
#include <cstdlib>

using namespace acface;

int main(int argc, char** argv) {
  SceneSpec spec;
  spec.seed = argc > 1 ? std::strtoull(argv[1], nullptr, 10) : 7;
  const Annotation a = gen_scene(spec).annotation;
  const HeatmapStack stack = synthesize(a, Sigma(2.0));
  const auto params = ExtractionParams::defaults(3.0);

  Prediction extracted, line, spline;
  for (const auto& n : a.anchors) {
    extracted.anchors[n.name] = extract_anchor(stack[stack.index_of(n.name)], Sigma(2.0));
    line.anchors[n.name] = spline.anchors[n.name] = n.point;
  }
  for (const auto& c : a.contours) {
    const auto traces = extract_contour(stack[stack.index_of(c.name)], params);
    extracted.contours[c.name] = traces_to_polylines(traces);
    const LandmarkChain chain(a.landmark_group(c.name).points, false);
    line.contours[c.name] = {line_contour(chain)};
    spline.contours[c.name] = {spline_contour(chain)};
    std::printf("%-28s %4zu dense pts  %zu trace(s)\n", c.name.c_str(), c.contour.size(), traces.size());
  }

  const auto gt = to_ground_truth(a);
  std::printf("\nNME (%% of inter-ocular distance %.1f px)\n", gt.normalization());
  for (auto [name, pred] : {std::pair{"line-contour", &line}, {"spline", &spline}, {"extracted", &extracted}}) {
    const auto r = nme_ac(gt, *pred);
    std::printf("  %-13s overall %.4f", name, r.nme);
    for (const auto& [part, v] : r.nme_per_part) std::printf("  %s %.4f", part.c_str(), v);
    std::printf("\n");
  }
  return 0;
}
