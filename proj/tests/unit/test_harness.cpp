#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <algorithm>
#include <map>
#include <set>

#include "oracles.hpp"
#include "tsl/config.hpp"
#include "tsl/error.hpp"
#include "tsl/experiment.hpp"
#include "tsl/io.hpp"
#include "tsl/synth.hpp"

using namespace tsl;
using nlohmann::json;

namespace {

DenseTensor random_tensor(std::vector<std::size_t> dims, Rng &rng)
{
  DenseTensor t(std::move(dims));
  for (auto &v : t.data()) {
    v = complex_normal(rng, 1.0);
  }
  return t;
}

bool same(std::span<cd const> a, std::span<cd const> b) { return std::ranges::equal(a, b); }

std::filesystem::path scratch(std::string const &name)
{
  auto const dir = std::filesystem::temp_directory_path() / "tsl_harness_test";
  std::filesystem::create_directories(dir);
  return dir / name;
}

ExperimentConfig small_entries_config(std::uint64_t seed)
{
  ExperimentConfig c;
  c.seed = seed;
  c.rank = 2;
  c.lambda = 0.1;
  c.step = FixedStep{0.05};
  c.domain = DataDomain::Entries;
  c.sampling.mode = SamplingMode::Uniform;
  c.sampling.fraction = 0.5;
  c.warm_start_frames = 2;
  return c;
}

} // namespace

TEST_CASE("CTEN round trips bit-exactly")
{
  Rng rng(91);
  auto const t = random_tensor({3, 4, 2}, rng);
  auto const back = decode_cten(encode_cten(t));
  CHECK(back.dims() == t.dims());
  CHECK(same(back.data(), t.data()));
  auto const path = scratch("a.cten");
  write_cten(path, t);
  CHECK(same(read_cten(path).data(), t.data()));
}

TEST_CASE("CTEN header layout and single precision")
{
  DenseTensor t({1, 2});
  t[0] = cd{1.5, -2.0};
  t[1] = cd{0.1, 0.0};
  auto const bytes = encode_cten(t, CtenPrecision::Single);
  REQUIRE(bytes.size() == 4 + 3 + 2 * 4 + 2 * 2 * 4);
  CHECK(bytes.substr(0, 4) == "CTEN");
  CHECK(bytes[4] == 1);
  CHECK(bytes[5] == 0);
  CHECK(bytes[6] == 2);
  CHECK(static_cast<unsigned char>(bytes[7]) == 1);
  CHECK(static_cast<unsigned char>(bytes[11]) == 2);
  auto const back = decode_cten(bytes);
  CHECK(back[0] == cd{1.5, -2.0});
  CHECK(back[1] == cd{static_cast<double>(0.1f), 0.0});
  CHECK(encode_cten(t, CtenPrecision::Double).size() == 4 + 3 + 2 * 4 + 2 * 2 * 8);
}

TEST_CASE("CTEN rejects malformed input")
{
  Rng rng(92);
  auto bytes = encode_cten(random_tensor({2, 2}, rng));
  auto bad = bytes;
  bad[0] = 'X';
  CHECK_THROWS_AS(decode_cten(bad), FormatError);
  bad = bytes;
  bad[4] = 2;
  CHECK_THROWS_AS(decode_cten(bad), FormatError);
  bad = bytes;
  bad[5] = 7;
  CHECK_THROWS_AS(decode_cten(bad), FormatError);
  CHECK_THROWS_AS(decode_cten(bytes.substr(0, bytes.size() - 1)), FormatError);
  CHECK_THROWS_AS(read_cten(scratch("missing.cten").string() + ".none"), IoError);
}

TEST_CASE("CSV formats")
{
  CHECK(metrics_csv({{0, 0.5, 0.25, 7}}) == "t,nmse,ssim,samples\n0,0.5,0.25,7\n");
  CHECK(masks_csv({{3, {1, 2}}, {3, {0, 4}}}) == "t,i,j\n3,1,2\n3,0,4\n");
  CHECK(masks_csv({{0, {1, 2, 3}}}) == "t,i,j,k\n0,1,2,3\n");
  CHECK(budget_csv({{1, 10, 8, 8.5}}) == "t,K,omega_size,expected\n1,10,8,8.5\n");
  CHECK(trace_csv({}).rfind("t,f_t,step_size,gamma_norm,residual_norm\n", 0) == 0);
  CHECK(format_double(0.1) == "0.1");
  CHECK(std::stod(format_double(1.0 / 3.0)) == 1.0 / 3.0);
}

TEST_CASE("config parsing")
{
  auto const c = parse_config(json::parse(R"({"seed": 4, "rank": 7, "lambda": 0.5,
      "step": {"mode": "hessian", "c_floor": 0.1, "c_cap": 10},
      "sampling": {"mode": "adaptive", "K": 30, "beta": 0.2},
      "patch": {"n1": 4, "n2": 4, "rho": 2}})"),
                              std::nullopt);
  CHECK(c.seed == 4);
  CHECK(c.rank == 7);
  CHECK(std::get<HessianBoundStep>(c.step).c_cap == 10.0);
  CHECK(c.sampling.mode == SamplingMode::Adaptive);
  CHECK(c.sampling.k == 30);
  CHECK(c.patch->rho == 2);
  CHECK(parse_config(json::parse(R"({"seed": 4})"), 9).seed == 9);
  CHECK(parse_config(to_json(c), std::nullopt).rank == 7);

  CHECK_THROWS_AS(parse_config(json::parse(R"({"rank": 3})"), std::nullopt), ConfigError);
  CHECK_THROWS_AS(parse_config(json::parse(R"({"seed": 1, "rnak": 3})"), std::nullopt), ConfigError);
  CHECK_THROWS_AS(parse_config(json::parse(R"({"seed": 1, "lambda": 0})"), std::nullopt), ConfigError);
  CHECK_THROWS_AS(parse_config(json::parse(R"({"seed": 1, "rank": "x"})"), std::nullopt), ConfigError);
  CHECK_THROWS_AS(parse_config(json::parse(R"({"seed": 1, "step": {"mode": "newton"}})"), std::nullopt),
                  ConfigError);
  CHECK_THROWS_AS(parse_config(json::parse(R"({"seed": 1, "sampling": {"fraction": 1.5}})"), std::nullopt),
                  ConfigError);
}

TEST_CASE("phantom generator")
{
  PhantomSpec p;
  p.n1 = 32;
  p.n2 = 32;
  p.frames = 40;
  auto const x = gen_phantom(p);
  CHECK(x.dims() == std::vector<std::size_t>{32, 32, 40});
  CHECK(same(x.last_mode_slice(3).data(), x.last_mode_slice(23).data()));
  CHECK(!same(x.last_mode_slice(3).data(), x.last_mode_slice(8).data()));
  p.amplitude = 0.0;
  auto const still = gen_phantom(p);
  for (std::size_t t = 1; t < p.frames; ++t) {
    CHECK(same(still.last_mode_slice(t).data(), still.last_mode_slice(0).data()));
  }
  p.period = 0.0;
  CHECK_THROWS_AS(gen_phantom(p), DomainError);
}

TEST_CASE("phantom k-space unfolding is approximately low rank")
{
  PhantomSpec p;
  p.frames = 60;
  RVec const s = Eigen::JacobiSVD<CMat>(unfold(kspace_stream(gen_phantom(p)), 2)).singularValues();
  MESSAGE("temporal unfolding sigma5/sigma1 = " << s(4) / s(0));
  CHECK(s(4) / s(0) < 0.05);
}

TEST_CASE("low-rank stream generator")
{
  Rng a(93), b(93);
  auto const x = gen_lowrank_stream({5, 4}, 2, 6, 0.0, a);
  auto const y = gen_lowrank_stream({5, 4}, 2, 6, 0.0, b);
  CHECK(same(x.data.data(), y.data.data()));
  for (std::size_t t = 0; t < 6; ++t) {
    CVec const g = x.temporal.row(static_cast<Eigen::Index>(t)).transpose();
    auto const want = synthesize_slice(x.truth, g);
    auto const got = x.data.last_mode_slice(t);
    for (std::size_t k = 0; k < got.size(); ++k) {
      CHECK(std::abs(got[k] - want[k]) < 1e-13);
    }
  }
  Rng c(94);
  auto const coh = gen_lowrank_stream({40, 3}, 2, 2, 0.0, c, 1.0);
  CHECK(coh.truth.factor(0).row(0).norm() > coh.truth.factor(0).row(39).norm());
}

TEST_CASE("kspace stream is a per-frame unitary transform")
{
  Rng rng(95);
  auto const x = random_tensor({4, 6, 3}, rng);
  auto const k = kspace_stream(x);
  auto const back = kspace_stream(k, true);
  for (std::size_t i = 0; i < x.size(); ++i) {
    CHECK(std::abs(back[i] - x[i]) < 1e-13);
  }
  CHECK(std::abs(k.frobenius_norm() - x.frobenius_norm()) < 1e-12);
}

TEST_CASE("experiment runs are reproducible")
{
  Rng rng(96);
  auto const stream = gen_lowrank_stream({6, 5}, 2, 12, 0.0, rng);
  for (auto mode : {RunMode::Track, RunMode::Batch}) {
    auto c = small_entries_config(11);
    c.epochs = 2;
    auto const a = run_experiment(c, mode, stream.data);
    auto const b = run_experiment(c, mode, stream.data);
    CHECK(metrics_csv(a.metrics) == metrics_csv(b.metrics));
    CHECK(masks_csv(a.masks) == masks_csv(b.masks));
    CHECK(a.metrics.size() == 12);
    c.seed = 12;
    CHECK(masks_csv(run_experiment(c, mode, stream.data).masks) != masks_csv(a.masks));
  }
}

TEST_CASE("warm-start frames are fully sampled")
{
  Rng rng(97);
  auto const stream = gen_lowrank_stream({6, 5}, 2, 8, 0.0, rng);
  auto const r = run_experiment(small_entries_config(1), RunMode::Track, stream.data);
  std::map<std::size_t, std::size_t> counts;
  for (auto const &m : r.masks) {
    ++counts[m.t];
  }
  CHECK(counts[0] == 30);
  CHECK(counts[1] == 30);
  CHECK(counts[2] == 15);
  CHECK(r.metrics[5].samples == 15);
}

TEST_CASE("adaptive runs read only sampled truth entries")
{
  Rng rng(98);
  auto const stream = gen_lowrank_stream({6, 6}, 2, 10, 0.0, rng);
  auto c = small_entries_config(5);
  c.sampling.mode = SamplingMode::Adaptive;
  c.sampling.k = 12;
  TensorFrameProvider inner(stream.data);
  TripwireProvider wire(inner);
  auto const r = run_experiment(c, RunMode::Adaptive, stream.data, &wire);
  std::set<std::pair<std::size_t, MultiIndex>> masks;
  for (auto const &m : r.masks) {
    masks.insert({m.t, m.index});
  }
  CHECK(wire.accesses() == masks);
  CHECK(r.budget.size() == 8);
  for (auto const &b : r.budget) {
    CHECK(b.omega_size <= 12);
    CHECK(b.expected <= 12.0);
  }
}

TEST_CASE("k-space adaptive runs sample whole rows including the centre line")
{
  PhantomSpec p;
  p.n1 = 16;
  p.n2 = 16;
  p.frames = 8;
  ExperimentConfig c;
  c.seed = 2;
  c.rank = 4;
  c.sampling.mode = SamplingMode::Adaptive;
  c.sampling.k = 4;
  c.warm_start_frames = 2;
  auto const r = run_experiment(c, RunMode::Adaptive, gen_phantom(p));
  std::map<std::size_t, std::set<std::size_t>> rows;
  std::map<std::size_t, std::size_t> entries;
  for (auto const &m : r.masks) {
    rows[m.t].insert(m.index[0]);
    ++entries[m.t];
  }
  for (std::size_t t = 2; t < 8; ++t) {
    CHECK(rows[t].count(0) == 1);
    CHECK(rows[t].size() <= 4);
    CHECK(entries[t] == rows[t].size() * 16);
  }
}

TEST_CASE("artifacts are written with a manifest")
{
  Rng rng(99);
  auto const stream = gen_lowrank_stream({4, 4}, 1, 5, 0.0, rng);
  auto c = small_entries_config(3);
  auto const r = run_experiment(c, RunMode::Track, stream.data);
  auto const dir = scratch("run");
  write_artifacts(c, RunMode::Track, r, dir, "in.cten");
  for (char const *f : {"recon.cten", "metrics.csv", "masks.csv", "trace.csv", "manifest.json"}) {
    CHECK(std::filesystem::exists(dir / f));
  }
  auto const m = json::parse(read_text(dir / "manifest.json"));
  CHECK(m["mode"] == "track");
  CHECK(m["config"]["seed"] == 3);
  CHECK(same(read_cten(dir / "recon.cten").data(), r.reconstruction.data()));
}

TEST_CASE("invalid runs raise typed errors")
{
  Rng rng(100);
  auto const stream = gen_lowrank_stream({4, 4}, 1, 5, 0.0, rng);
  auto c = small_entries_config(1);
  CHECK_THROWS_AS(run_experiment(c, RunMode::Baseline, stream.data), ConfigError);
  c.domain = DataDomain::Kspace;
  c.patch = PatchConfig{3, 3, 1};
  CHECK_THROWS_AS(run_experiment(c, RunMode::Track, stream.data), ShapeError);
}

#ifdef TSL_CLI_PATH
TEST_CASE("command line exit codes")
{
  auto const cli = std::string(TSL_CLI_PATH);
  auto const dir = scratch("cli");
  std::filesystem::create_directories(dir);
  auto const run = [&](std::string const &args) {
    int const status = std::system((cli + " " + args + " > /dev/null 2>&1").c_str());
    return WEXITSTATUS(status);
  };
  auto const cfg = dir / "c.json";
  write_text(cfg, R"({"seed": 1, "rank": 3, "phantom": {"n1": 16, "n2": 16, "frames": 8}})");
  auto const input = (dir / "p.cten").string();
  CHECK(run("synth --config " + cfg.string() + " --out " + input) == 0);
  CHECK(run("track --config " + cfg.string() + " --input " + input + " --out " + (dir / "o").string()) == 0);
  CHECK(std::filesystem::exists(dir / "o" / "metrics.csv"));
  CHECK(run("metrics --truth " + input + " --estimate " + (dir / "o" / "recon.cten").string() + " --out " +
            (dir / "m.csv").string()) == 0);
  CHECK(run("track --input " + input + " --out " + (dir / "x").string()) == 1);
  CHECK(run("track --seed 1 --input " + (dir / "none.cten").string() + " --out " + (dir / "x").string()) == 2);
  write_text(dir / "bad.json", R"({"seed": 1, "bogus": 2})");
  CHECK(run("track --config " + (dir / "bad.json").string() + " --input " + input + " --out " +
            (dir / "x").string()) == 1);
}
#endif
