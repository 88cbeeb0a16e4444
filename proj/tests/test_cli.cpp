#include <doctest.h>

#include <array>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include "mocseg/ground_truth.hpp"
#include "mocseg/imaging.hpp"
#include "temp_dir.hpp"

using testing_support::TempDir;

namespace {

struct Run {
  int status = -1;
  std::string output;  // stdout and stderr interleaved
};

Run run(const std::string& args) {
  const std::string cmd = std::string("\"") + MOCSEG_CLI_PATH + "\" " + args + " 2>&1";
  Run r;
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::array<char, 4096> buf{};
  while (std::fgets(buf.data(), buf.size(), pipe)) r.output += buf.data();
  const int raw = pclose(pipe);
  r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  return r;
}

std::string quoted(const std::filesystem::path& p) { return "\"" + p.string() + "\""; }

void write_text(const std::filesystem::path& p, const std::string& s) {
  std::ofstream f(p, std::ios::binary);
  f << s;
}

std::string read_text(const std::filesystem::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("synth, segment and evaluate end to end") {
  TempDir dir;
  write_text(dir / "spec.json",
             R"({"name":"p1","width":500,"height":400,"seed":4,"lines":[)"
             R"({"orientation":0,"length":300,"center":[250,120]},)"
             R"({"orientation":0,"length":300,"center":[250,280]}]})");
  const Run synth = run("synth --spec " + quoted(dir / "spec.json") + " --out-dir " + quoted(dir / "gt") + " --diva");
  REQUIRE_MESSAGE(synth.status == 0, synth.output);
  for (const char* f : {"p1.png", "p1_labels.png", "p1.xml", "p1_diva.png"}) CHECK(std::filesystem::exists(dir / "gt" / f));
  CHECK(mocseg::read_raw_labels(dir / "gt" / "p1_labels.png").n_lines == 2);

  // Ground truth scored against itself.
  const Run self = run("evaluate --gt " + quoted(dir / "gt") + " --pred " + quoted(dir / "gt") + " --img " +
                       quoted(dir / "gt") + " --csv " + quoted(dir / "self.csv"));
  REQUIRE_MESSAGE(self.status == 0, self.output);
  CHECK(self.output.find("mean_pixel_iu=1 mean_line_iu=1") != std::string::npos);
  CHECK(read_text(dir / "self.csv") == "page,pixel_iu,line_iu,tp,fp,fn,cl,ml,el\n" + [&] {
          const auto img = mocseg::load_binary_image(dir / "gt" / "p1.png");
          return "p1,1,1," + std::to_string(img.foreground_count()) + ",0,0,2,0,0\n";
        }());

  const Run seg = run("segment " + quoted(dir / "gt" / "p1.png") + " --out-dir " + quoted(dir / "pred") + " --debug");
  REQUIRE_MESSAGE(seg.status == 0, seg.output);
  for (const char* f : {"p1.xml", "p1_labels.png", "p1_overlay.png", "p1_debug_graph.csv", "p1_debug_mask.png"})
    CHECK(std::filesystem::exists(dir / "pred" / f));
  CHECK(mocseg::read_page_xml(dir / "pred" / "p1.xml").polygons.size() == 2);

  const Run ev = run("evaluate --gt " + quoted(dir / "gt") + " --pred " + quoted(dir / "pred") + " --img " +
                     quoted(dir / "gt"));
  REQUIRE_MESSAGE(ev.status == 0, ev.output);
  CHECK(std::filesystem::exists(dir / "pred" / "evaluation.csv"));
  CHECK(ev.output.find("pages=1") != std::string::npos);

  const Run vis = run("visualize " + quoted(dir / "gt" / "p1_diva.png") + " --out " + quoted(dir / "v.png"));
  CHECK_MESSAGE(vis.status == 0, vis.output);
  CHECK(std::filesystem::exists(dir / "v.png"));
}

TEST_CASE("a blank page yields a PAGE file without text lines") {
  TempDir dir;
  mocseg::save_binary_image(dir / "blank.png", mocseg::BinaryImage(64, 48));
  const Run seg = run("segment " + quoted(dir / "blank.png") + " --out-dir " + quoted(dir / "out"));
  REQUIRE_MESSAGE(seg.status == 0, seg.output);
  const std::string xml = read_text(dir / "out" / "blank.xml");
  CHECK(xml.find("<TextLine") == std::string::npos);
  CHECK(xml.find("imageWidth=\"64\"") != std::string::npos);
}

TEST_CASE("a missing input fails and names the file") {
  TempDir dir;
  const Run r = run("segment " + quoted(dir / "absent.png") + " --out-dir " + quoted(dir / "out"));
  CHECK(r.status != 0);
  CHECK(r.output.find("absent.png") != std::string::npos);
}

TEST_CASE("an undecodable input fails and names the file") {
  TempDir dir;
  write_text(dir / "junk.png", "not an image");
  const Run r = run("segment " + quoted(dir / "junk.png") + " --out-dir " + quoted(dir / "out"));
  CHECK(r.status != 0);
  CHECK(r.output.find("junk.png") != std::string::npos);
}

TEST_CASE("usage errors exit nonzero") {
  CHECK(run("frobnicate").status != 0);
  CHECK(run("").status != 0);
  CHECK(run("evaluate --gt x").status != 0);
  CHECK(run("--help").status == 0);
}

TEST_CASE("a bad config file is reported") {
  TempDir dir;
  mocseg::save_binary_image(dir / "p.png", mocseg::BinaryImage(8, 8));
  write_text(dir / "bad.ini", "nonsense_key = 3\n");
  const Run r = run("segment " + quoted(dir / "p.png") + " --out-dir " + quoted(dir / "o") + " --config " +
                    quoted(dir / "bad.ini"));
  CHECK(r.status != 0);
  CHECK(r.output.find("nonsense_key") != std::string::npos);
}
