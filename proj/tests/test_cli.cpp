#include <clocale>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include "doctest.h"
#include "effdyn/config.hpp"
#include "effdyn/error.hpp"
#include "effdyn/format.hpp"
#include "effdyn/run.hpp"
#include "json.hpp"

using namespace effdyn;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    std::random_device rd;
    path = fs::temp_directory_path() / ("effdyn-test-" + std::to_string(rd()) + std::to_string(rd()));
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string parse_message(std::string_view text, Command c) {
  try {
    parse_config(text, c);
  } catch (const Error& e) {
    CHECK(e.category() == ErrorCategory::parse);
    return e.what();
  }
  return "";
}

RunOptions quiet_options(const fs::path& out, std::string raw = {}) {
  RunOptions o;
  o.out_dir = out;
  o.threads = 1;
  o.raw_config = std::move(raw);
  return o;
}

}  // namespace

TEST_CASE("command names") {
  for (auto c : all_commands()) CHECK(parse_command(to_string(c)) == c);
  CHECK_FALSE(parse_command("bogus").has_value());
}

TEST_CASE("empty config takes every default and echoes it") {
  const auto cfg = parse_config("", Command::scattering);
  const auto echo = serialize(cfg);
  for (const auto& [key, value] : cfg.values) CHECK(echo.find(key + " = " + value + "\n") != std::string::npos);
  CHECK(cfg.text("potential.kind") == "square_barrier");
  CHECK(cfg.integer("radial.M") == 10000);
  CHECK(cfg.integers("scattering.Ns") == std::vector<int>{2, 8, 32, 128});
}

TEST_CASE("potential stanza") {
  const auto cfg = parse_config("potential.kind = square_barrier\npotential.V0 = 2.0\npotential.R0 = 1.0\n",
                                Command::scattering);
  const auto v = cfg.potential();
  REQUIRE(std::holds_alternative<SquareBarrier>(v));
  CHECK(std::get<SquareBarrier>(v).height == 2.0);
  CHECK(std::get<SquareBarrier>(v).radius == 1.0);

  const auto sectioned = parse_config("[potential]\nkind = gaussian   # comment\nA = 3\nsigma = 0.5\n", Command::hartree);
  const auto g = sectioned.potential();
  REQUIRE(std::holds_alternative<GaussianPotential>(g));
  CHECK(std::get<GaussianPotential>(g).amplitude == 3.0);
  CHECK(std::get<GaussianPotential>(g).sigma == 0.5);

  CHECK(parse_message("[potential]\nkind = square_barrier\nsigma = 1\n", Command::scattering).find("line 3") !=
        std::string::npos);
  CHECK(parse_message("potential.kind = lennard_jones\n", Command::scattering).find("lennard_jones") !=
        std::string::npos);
}

TEST_CASE("malformed values name the line and key") {
  const auto msg = parse_message("[evolution]\ndt = 1e--3\n", Command::hartree);
  CHECK(msg.find("line 2") != std::string::npos);
  CHECK(msg.find("evolution.dt") != std::string::npos);

  CHECK(parse_message("grid.M = 12.5\n", Command::hartree).find("grid.M") != std::string::npos);
  CHECK(parse_message("grid.M = 2\n", Command::hartree).find("at least 3") != std::string::npos);
  CHECK(parse_message("converge.Ns = 2,x,4\n", Command::converge).find("'x'") != std::string::npos);
  CHECK(parse_message("radial.scheme = euler\n", Command::correlate).find("radial.scheme") != std::string::npos);
  CHECK(parse_message("dt = 0.1,\n", Command::hartree).find("line 1") != std::string::npos);
}

TEST_CASE("structural config errors") {
  CHECK(parse_message("grid.L = 8\ngrid.L = 9\n", Command::hartree).find("duplicate") != std::string::npos);
  CHECK(parse_message("grid.L = 8\n", Command::scattering).find("unknown key") != std::string::npos);
  CHECK(parse_message("no equals sign\n", Command::hartree).find("line 1") != std::string::npos);
  CHECK(parse_message("[grid\n", Command::hartree).find("section") != std::string::npos);
  CHECK(parse_message("", Command::marginals).find("marginals.input") != std::string::npos);
  CHECK(parse_message("= 3\n", Command::hartree).find("missing key") != std::string::npos);
}

TEST_CASE("numbers do not depend on the locale") {
  const char* old = std::setlocale(LC_NUMERIC, nullptr);
  const std::string saved = old ? old : "C";
  for (const char* name : {"de_DE.UTF-8", "fr_FR.UTF-8", "de_DE"}) {
    if (!std::setlocale(LC_NUMERIC, name)) continue;
    const auto cfg = parse_config("evolution.dt = 0.5\n", Command::hartree);
    CHECK(cfg.real("evolution.dt") == 0.5);
    CHECK(serialize(cfg).find("evolution.dt = 0.5\n") != std::string::npos);
  }
  std::setlocale(LC_NUMERIC, saved.c_str());
  CHECK(parse_config("evolution.dt = 2.5e-3\n", Command::hartree).real("evolution.dt") == 2.5e-3);
}

TEST_CASE("serialize then parse is the identity on random configs") {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(-1e3, 1e3);
  std::uniform_int_distribution<int> small(8, 500);
  const std::vector<std::string> kinds{"zero", "gaussian", "square_barrier", "soft_coulomb", "harmonic_trap"};
  for (int trial = 0; trial < 200; ++trial) {
    const Command c = all_commands()[static_cast<std::size_t>(trial) % all_commands().size()];
    std::string text = c == Command::marginals ? "marginals.input = some/dir\n" : "";
    if (c != Command::gp) text += "potential.kind = " + kinds[static_cast<std::size_t>(trial / 8) % kinds.size()] + "\n";
    auto base = parse_config(text, c);
    // Perturb every numeric key that accepts arbitrary values.
    for (const auto& [key, value] : base.values) {
      if (key == "potential.kind" || key == "marginals.input" || key.find("scheme") != std::string::npos ||
          key.find("snapshots") != std::string::npos || key == "gp.mode")
        continue;
      if (value.find(',') != std::string::npos) {
        text += key + " = " + format_double(u(rng)) + "," + format_double(u(rng)) + "\n";
        if (key.find("Ns") != std::string::npos) text.replace(text.rfind(key), std::string::npos, key + " = 2,7\n");
      } else if (key == "seed" || key.find(".M") != std::string::npos || key.find("steps") != std::string::npos ||
                 key.find("record_every") != std::string::npos || key == "nbody.N" || key == "marginals.k") {
        text += key + " = " + std::to_string(small(rng)) + "\n";
      } else {
        text += key + " = " + format_double(u(rng) * std::pow(10.0, small(rng) % 20 - 10)) + "\n";
      }
    }
    const auto cfg = parse_config(text, c);
    CHECK(parse_config(serialize(cfg), c) == cfg);
  }
}

TEST_CASE("FNV-1a reference values") {
  CHECK(fnv1a_hex("") == "cbf29ce484222325");
  CHECK(fnv1a_hex("a") == "af63dc4c8601ec8c");
  CHECK(fnv1a_hex("foobar") == "85944171f73967e8");
}

TEST_CASE("exit codes are distinct per category") {
  std::set<int> codes;
  for (auto c : {ErrorCategory::structural, ErrorCategory::domain, ErrorCategory::resource, ErrorCategory::numerical,
                 ErrorCategory::parse, ErrorCategory::io})
    codes.insert(exit_code(c));
  CHECK(codes.size() == 6);
  CHECK(codes.count(0) == 0);
  CHECK(codes.count(1) == 0);
  CHECK(codes.count(2) == 0);
  CHECK(exit_code(ErrorCategory::resource) != exit_code(ErrorCategory::numerical));
}

TEST_CASE("snapshot encoding") {
  const UniformGrid g(4.0, 4);
  auto psi = product_state(gaussian_packet(g, 0.3, 0.7, 1.0), 2);
  const auto bytes = encode_nbody(psi, 0.125);
  REQUIRE(bytes.size() == 32 + 16 * 16);
  CHECK(static_cast<unsigned char>(bytes[0]) == 4);  // little-endian M
  const auto back = decode_nbody(bytes);
  CHECK(back.time == 0.125);
  CHECK(back.state.grid() == g);
  CHECK(back.state.particles() == 2);
  for (std::size_t i = 0; i < psi.size(); ++i) CHECK(back.state.amplitudes()[i] == psi.amplitudes()[i]);
  CHECK_THROWS_AS(decode_nbody(std::string_view(bytes).substr(0, bytes.size() - 1)), Error);

  const std::vector<cplx> one{{1.0, -2.0}};
  const auto field = encode_field(one);
  REQUIRE(field.size() == 16);
  CHECK(static_cast<unsigned char>(field[7]) == 0x3f);  // 1.0 = 0x3ff0000000000000
  CHECK(static_cast<unsigned char>(field[15]) == 0xc0);  // -2.0 = 0xc000000000000000
}

TEST_CASE("scattering run writes the documented artifacts") {
  TempDir dir;
  const std::string raw = "radial.M = 2000\n";
  const auto summary = run(parse_config(raw, Command::scattering), quiet_options(dir.path, raw));
  for (const char* name : {"scattering.csv", "coupling.csv", "profile.csv", "resolved.cfg", "manifest.json"})
    CHECK(fs::exists(dir.path / name));
  CHECK(summary.files.size() == 5);
  const auto csv = slurp(dir.path / "scattering.csv");
  CHECK(csv.rfind("kind,params,M,R,a0_integral,a0_asymptotic,b0,coupling_8pi_a0\nsquare_barrier,V0=2;R0=1,2000,20,", 0) == 0);
  CHECK(csv.find('\r') == std::string::npos);
  const auto manifest = nlohmann::json::parse(slurp(dir.path / "manifest.json"));
  CHECK(manifest["config_hash"] == "fnv1a64:" + fnv1a_hex(raw));
  CHECK(manifest["version"] == kVersion);
  CHECK(manifest["results"]["a0_integral"].get<double>() == doctest::Approx(1.0 - std::tanh(1.0)).epsilon(1e-6));
  CHECK(parse_config(slurp(dir.path / "resolved.cfg"), Command::scattering) ==
        parse_config(raw, Command::scattering));
  for (const auto& e : fs::recursive_directory_iterator(dir.path)) CHECK(e.path().extension() != ".partial");
}

TEST_CASE("identical configs give bitwise identical CSV") {
  TempDir a, b;
  const std::string raw = "grid.M = 64\nevolution.steps = 50\nevolution.record_every = 10\n";
  const auto cfg = parse_config(raw, Command::hartree);
  run(cfg, quiet_options(a.path, raw));
  run(cfg, quiet_options(b.path, raw));
  CHECK(slurp(a.path / "hartree.csv") == slurp(b.path / "hartree.csv"));
  CHECK(slurp(a.path / "hartree_final.bin") == slurp(b.path / "hartree_final.bin"));
  CHECK(slurp(a.path / "hartree_final.bin").size() == 64 * 16);
  const auto csv = slurp(a.path / "hartree.csv");
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 7);
}

TEST_CASE("invalid output directory fails cleanly") {
  TempDir dir;
  fs::create_directories(dir.path);
  const fs::path file = dir.path / "occupied";
  std::ofstream(file) << "x";
  try {
    run(parse_config("", Command::scattering), quiet_options(file));
    FAIL("expected an io error");
  } catch (const Error& e) {
    CHECK(e.category() == ErrorCategory::io);
  }
  CHECK(std::distance(fs::directory_iterator(dir.path), fs::directory_iterator{}) == 1);
}

TEST_CASE("failed runs leave no files") {
  TempDir dir;
  const auto cfg = parse_config("evolution.dt = 0.5\nevolution.steps = 10\nevolution.energy_tolerance = 1e-8\n",
                                Command::hartree);
  try {
    run(cfg, quiet_options(dir.path));
    FAIL("expected a numerical error");
  } catch (const Error& e) {
    CHECK(e.category() == ErrorCategory::numerical);
  }
  CHECK_FALSE(fs::exists(dir.path));
}

TEST_CASE("gp ground state and evolution modes") {
  TempDir a, b;
  run(parse_config("gp.mode = ground_state\ngrid.M = 64\n", Command::gp), quiet_options(a.path));
  const auto manifest = nlohmann::json::parse(slurp(a.path / "manifest.json"));
  CHECK(manifest["results"]["residual"].get<double>() <= 1e-6);
  run(parse_config("grid.M = 64\nevolution.steps = 20\n", Command::gp), quiet_options(b.path));
  CHECK(fs::exists(b.path / "gp.csv"));
}

TEST_CASE("nbody snapshots feed the marginals command") {
  TempDir nb, mg;
  const std::string raw = "grid.M = 8\ngrid.L = 8\nnbody.N = 3\nevolution.steps = 40\nevolution.record_every = 10\n";
  run(parse_config(raw, Command::nbody), quiet_options(nb.path, raw));
  CHECK(fs::exists(nb.path / "snapshots" / "nbody_0004.bin"));
  CHECK(fs::file_size(nb.path / "snapshots" / "nbody_0000.bin") == 32 + 16 * 512);

  run(parse_config("marginals.input = " + nb.path.string() + "\n", Command::marginals), quiet_options(mg.path));
  std::istringstream csv(slurp(mg.path / "marginals.csv"));
  std::string line;
  std::getline(csv, line);
  CHECK(line == "t,k,trace,min_eig,distance_to_hartree,bbgky_residual");
  int rows = 0;
  while (std::getline(csv, line)) {
    std::vector<std::string> cells;
    std::stringstream ls(line);
    for (std::string c; std::getline(ls, c, ',');) cells.push_back(c);
    REQUIRE(cells.size() == 6);
    CHECK(std::stod(cells[2]) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::stod(cells[3]) >= -1e-8);
    if (rows == 0) CHECK(std::stod(cells[4]) <= 1e-12);
    const bool edge = rows == 0 || rows == 4;
    CHECK((cells[5] == "nan") == edge);
    ++rows;
  }
  CHECK(rows == 5);

  // A truncated snapshot is a structural error.
  const auto victim = nb.path / "snapshots" / "nbody_0002.bin";
  fs::resize_file(victim, fs::file_size(victim) - 8);
  try {
    run(parse_config("marginals.input = " + nb.path.string() + "\n", Command::marginals), quiet_options(mg.path / "x"));
    FAIL("expected a structural error");
  } catch (const Error& e) {
    CHECK(e.category() == ErrorCategory::structural);
    CHECK(std::string(e.what()).find("nbody_0002.bin") != std::string::npos);
  }
}

TEST_CASE("converge writes one row per N and the slope") {
  TempDir dir;
  const std::string raw = "grid.M = 8\nconverge.Ns = 2,3,4,5\nevolution.steps = 20\n";
  run(parse_config(raw, Command::converge), quiet_options(dir.path, raw));
  const auto csv = slurp(dir.path / "converge.csv");
  CHECK(csv.rfind("N,distance,bound_sqrtN,bound_overN\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 5);
  CHECK(fs::exists(dir.path / "converge.gp"));
  const auto manifest = nlohmann::json::parse(slurp(dir.path / "manifest.json"));
  CHECK(manifest["results"]["slope"].is_number());
  CHECK(manifest["results"]["complete"] == true);
}

TEST_CASE("an aborted convergence study keeps its partial report") {
  TempDir dir;
  const std::string raw = "grid.M = 64\nconverge.Ns = 2,12\nevolution.steps = 2\n";
  try {
    run(parse_config(raw, Command::converge), quiet_options(dir.path, raw));
    FAIL("expected a resource error");
  } catch (const Error& e) {
    CHECK(e.category() == ErrorCategory::resource);
  }
  const auto csv = slurp(dir.path / "converge.csv");
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 2);
  const auto manifest = nlohmann::json::parse(slurp(dir.path / "manifest.json"));
  CHECK(manifest["results"]["complete"] == false);
}

TEST_CASE("correlate and dispersion on a small box") {
  TempDir a, b;
  const std::string radial = "[radial]\nradius = 80\nplateau = 30\nramp = 30\nspacing = 0.05\ndt = 0.0025\n";
  run(parse_config(radial + "[correlate]\ntimes = 0.5,1\n", Command::correlate), quiet_options(a.path));
  const auto csv = slurp(a.path / "correlate.csv");
  CHECK(csv.rfind("T,F,prop1_bound,supnorm_omega\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);
  CHECK(fs::exists(a.path / "correlate.gp"));
  run(parse_config(radial + "[dispersion]\ntimes = 0.5,1,2\nfit_lo = 0.5\nfit_hi = 2\n", Command::dispersion),
      quiet_options(b.path));
  const auto manifest = nlohmann::json::parse(slurp(b.path / "manifest.json"));
  CHECK(manifest["results"]["exponent"].get<double>() < 0.0);
  CHECK(fs::exists(b.path / "dispersion.gp"));
}
