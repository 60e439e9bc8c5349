#include <acface/io.hpp>
#include <acface/synthscene.hpp>

#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>

using namespace acface;

namespace {

std::string hex(const std::vector<std::uint8_t>& b, std::size_t from, std::size_t n) {
  std::string s;
  char buf[3];
  for (std::size_t i = from; i < from + n; ++i) {
    std::snprintf(buf, sizeof buf, "%02X", b[i]);
    s += buf;
  }
  return s;
}

HeatmapStack tiny_stack() {
  HeatmapStack s;
  s.add("h", Heatmap(2, 2, std::vector<float>{0.0f, 0.25f, 0.5f, 1.0f}));
  return s;
}

std::size_t format_offset(const std::vector<std::uint8_t>& b) {
  try {
    decode_ach(b);
  } catch (const FormatError& e) {
    return e.offset();
  }
  ADD_FAILURE() << "no FormatError";
  return 0;
}

}  // namespace

TEST(Io, AchKnownBytes) {
  const auto b = encode_ach(tiny_stack());
  ASSERT_EQ(b.size(), 20u + 4u + 1u + 16u);
  EXPECT_EQ(hex(b, 0, 20), "4143484D" "01000000" "02000000" "02000000" "01000000");
  EXPECT_EQ(hex(b, 20, 5), "0100000068");
  EXPECT_EQ(hex(b, 25, 16), "00000000" "0000803E" "0000003F" "0000803F");
}

TEST(Io, AchRoundTrip) {
  const auto a = gen_scene(SceneSpec{}).annotation;
  const auto s = synthesize(a, Sigma(2.0));
  const auto back = decode_ach(encode_ach(s));
  ASSERT_EQ(back.size(), s.size());
  EXPECT_EQ(back.names(), s.names());
  for (std::size_t i = 0; i < s.size(); ++i) EXPECT_EQ(back[i], s[i]);

  const auto path = (std::filesystem::temp_directory_path() / "acface_io_test.ach").string();
  write_ach(path, s);
  EXPECT_EQ(read_ach(path).names(), s.names());
  std::filesystem::remove(path);
}

TEST(Io, AchErrorsCarryOffsets) {
  const auto good = encode_ach(tiny_stack());
  auto bad_magic = good;
  bad_magic[1] = 'X';
  EXPECT_EQ(format_offset(bad_magic), 0u);
  auto bad_version = good;
  bad_version[4] = 2;
  EXPECT_EQ(format_offset(bad_version), 4u);
  auto truncated = good;
  truncated.resize(good.size() - 3);
  EXPECT_EQ(format_offset(truncated), 25u);  // payload starts after the name
  auto trailing = good;
  trailing.push_back(0);
  EXPECT_EQ(format_offset(trailing), good.size());
  EXPECT_EQ(format_offset(std::vector<std::uint8_t>(good.begin(), good.begin() + 10)), 8u);
  EXPECT_THROW(read_ach("/nonexistent/dir/x.ach"), std::runtime_error);
}

TEST(Io, PgmScaling) {
  const auto b = encode_pgm(Heatmap(2, 2, std::vector<float>{0.0f, 0.25f, 0.5f, 1.0f}));
  const std::string header = "P5\n2 2\n65535\n";
  ASSERT_EQ(b.size(), header.size() + 8);
  EXPECT_EQ(std::string(b.begin(), b.begin() + header.size()), header);
  EXPECT_EQ(hex(b, header.size(), 8), "0000" "4000" "8000" "FFFF");
  const auto flat = encode_pgm(Heatmap(3, 1, 0.7f));
  for (std::size_t i = flat.size() - 6; i < flat.size(); ++i) EXPECT_EQ(flat[i], 0);
}

TEST(Io, Round9) {
  EXPECT_EQ(round9(0.1), 0.1);
  EXPECT_EQ(round9(1.0 / 3.0), 0.333333333);
  EXPECT_EQ(round9(123456789.4), 123456789.0);
  EXPECT_THROW(round9(NAN), std::invalid_argument);
}

TEST(Io, AnnotationJsonRoundTrip) {
  const auto a = gen_scene(SceneSpec{}).annotation;
  const std::string text = dump_json(annotation_to_json(a));
  const Annotation b = annotation_from_json(parse_json(text));
  EXPECT_NO_THROW(b.validate());
  EXPECT_EQ(b.anchors.size(), a.anchors.size());
  EXPECT_EQ(b.normalization_pair, a.normalization_pair);
  EXPECT_EQ(b.parts, a.parts);
  for (std::size_t i = 0; i < a.contours.size(); ++i) {
    const auto& p = a.contours[i].contour.points();
    const auto& q = b.contours[i].contour.points();
    ASSERT_EQ(p.size(), q.size());
    for (std::size_t k = 0; k < p.size(); ++k) EXPECT_LT(distance(p[k], q[k]), 1e-6);
  }
  // Serialisation is a fixed point after one round trip.
  EXPECT_EQ(dump_json(annotation_to_json(b)), text);
}

TEST(Io, JsonKeysAreSorted) {
  const std::string text = dump_json(annotation_to_json(gen_scene(SceneSpec{}).annotation));
  const auto pos = [&](const char* k) { return text.find(std::string("\"") + k + "\""); };
  EXPECT_LT(pos("anchors"), pos("contours"));
  EXPECT_LT(pos("contours"), pos("image_size"));
  EXPECT_LT(pos("image_size"), pos("landmarks"));
  EXPECT_EQ(text.back(), '\n');
}

TEST(Io, ParseErrorOffset) {
  try {
    parse_json("{\"a\": [1, 2,, 3]}");
    FAIL();
  } catch (const FormatError& e) {
    EXPECT_EQ(e.offset(), 13u);
  }
}

TEST(Io, TraceDocRoundTrip) {
  TraceDoc d;
  d.params = ExtractionParams::defaults(3.0);
  d.anchors = {{"nose_tip", {10.125, 20.5}}};
  ContourTrace t{{{1, 2}, {2, 2.5}, {3, 2.75}}, {6.0, 7.0, 6.5}};
  d.channels = {{"chin_boundary", {t}}};
  const TraceDoc e = trace_doc_from_json(parse_json(dump_json(trace_doc_to_json(d))));
  EXPECT_EQ(e.params.min_trace_length, 3);
  EXPECT_NEAR(e.params.high_threshold, d.params.high_threshold, 1e-7);
  EXPECT_EQ(e.anchors[0].point, d.anchors[0].point);
  ASSERT_EQ(e.channels.size(), 1u);
  EXPECT_EQ(e.channels[0].traces[0].points, t.points);
  const Prediction p = prediction_from_json(trace_doc_to_json(d));
  EXPECT_EQ(p.contours.at("chin_boundary").size(), 1u);

  auto j = trace_doc_to_json(d);
  j["channels"][0]["traces"][0]["scores"].erase(0);
  EXPECT_THROW(trace_doc_from_json(j), std::invalid_argument);
}

TEST(Io, EvalReportJsonAndCsv) {
  const auto a = gen_scene(SceneSpec{}).annotation;
  const auto rep = evaluate({to_ground_truth(a)}, {to_prediction(a)});
  const auto j = eval_report_to_json(rep);
  EXPECT_NEAR(j.at("nme_overall").get<double>(), 0.0, 1e-12);  // arc-length GT points carry rounding residue
  EXPECT_EQ(j.at("auc").get<double>(), 100.0);
  EXPECT_EQ(j.at("faces").size(), 1u);
  const std::string csv = ced_csv(rep.curve);
  EXPECT_EQ(csv.rfind("nme,fraction\n", 0), 0u);
  EXPECT_EQ(csv.substr(csv.size() - 3), ",1\n");
}
