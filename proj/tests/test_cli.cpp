#include <fstream>

#include "cli_harness.hpp"
#include "doctest.h"
#include "hashemb/codes.hpp"
#include "hashemb/dense.hpp"
#include "hashemb/encoder.hpp"
#include "hashemb/synth.hpp"
#include "oracles.hpp"

using namespace hashemb;
using harness::run;
using harness::slurp;

TEST_CASE("encode writes the configured header") {
  const auto dir = oracle::scratch_dir("cli_encode");
  {
    std::ofstream g(dir / "g.tsv");
    g << "0 1\n1 2\n2 3\n3 0\n0 2\n";
  }
  const auto out = (dir / "codes.gecc").string();
  const auto r = run({"encode", "--edges", (dir / "g.tsv").string(), "--c", "256", "--m", "16",
                      "--seed", "42", "--threshold", "median", "--out", out});
  REQUIRE_MESSAGE(r.rc == 0, r.err);
  CHECK(r.out.find("n=4 n_bit=128 code_bytes=64") != std::string::npos);
  CHECK(r.out.find("config: c=256") != std::string::npos);
  const auto codes = read_codes(std::filesystem::path(out));
  CHECK(codes.n() == 4);
  CHECK(codes.c() == 256);
  CHECK(codes.m() == 16);
  CHECK(codes.seed() == 42);
  CHECK(codes.mode() == ThresholdMode::median);
}

TEST_CASE("encode rejects a non power of two") {
  const auto dir = oracle::scratch_dir("cli_c3");
  {
    std::ofstream g(dir / "g.tsv");
    g << "0 1\n";
  }
  const auto r = run({"encode", "--edges", (dir / "g.tsv").string(), "--c", "3", "--out",
                      (dir / "x.gecc").string()});
  CHECK(r.rc != 0);
  CHECK(r.err.find("c must be a power of 2") != std::string::npos);
  CHECK(std::count(r.err.begin(), r.err.end(), '\n') == 1);
  CHECK_FALSE(std::filesystem::exists(dir / "x.gecc"));
}

TEST_CASE("encode of a dense fixture matches the oracle, streamed or not") {
  const auto dir = oracle::scratch_dir("cli_dense");
  DenseMatrix a(6, 4);
  for (std::size_t i = 0; i < a.data.size(); ++i) {
    a.data[i] = static_cast<float>((i * 37 % 11) - 5.0) / 3.0f;
  }
  write_dense(dir / "a.gef32", a);
  const auto mem = run({"encode", "--aux", (dir / "a.gef32").string(), "--c", "4", "--m", "3",
                        "--seed", "11", "--out", (dir / "mem.gecc").string()});
  const auto streamed = run({"encode", "--aux", (dir / "a.gef32").string(), "--stream", "--c", "4",
                             "--m", "3", "--seed", "11", "--out", (dir / "stream.gecc").string()});
  REQUIRE(mem.rc == 0);
  REQUIRE(streamed.rc == 0);
  CHECK(slurp(dir / "mem.gecc") == slurp(dir / "stream.gecc"));

  oracle::Matrix rows(6, std::vector<double>(4));
  for (std::size_t i = 0; i < 6; ++i) {
    for (std::size_t j = 0; j < 4; ++j) rows[i][j] = a(i, j);
  }
  const auto codes = read_codes(dir / "mem.gecc");
  CHECK(oracle::matches(codes, oracle::encode_dense(rows, 4, 3, 11, ThresholdMode::median)));
}

TEST_CASE("mem-report") {
  const auto r = run({"mem-report", "--n", "1871031", "--d-e", "64", "--f", "32", "--c", "256",
                      "--m", "16"});
  REQUIRE(r.rc == 0);
  CHECK(r.out.find("raw_embedding_mib 456.79\n") != std::string::npos);
  CHECK(r.out.find("code_mib 28.55\n") != std::string::npos);

  const auto ratio = run({"mem-report", "--raw-mib", "458.14", "--compressed-mib", "39.02"});
  REQUIRE(ratio.rc == 0);
  CHECK(ratio.out.find("ratio 11.74\n") != std::string::npos);

  const auto minimal = run({"mem-report", "--n", "1", "--d-e", "1", "--c", "2", "--m", "1",
                            "--d-c", "1", "--d-m", "1", "--l", "2"});
  REQUIRE(minimal.rc == 0);
  CHECK(minimal.out.find("raw_embedding_mib 0.00") != std::string::npos);

  const auto bad = run({"mem-report", "--l", "1"});
  CHECK(bad.rc == 1);
  CHECK(bad.err.rfind("error: ", 0) == 0);
}

TEST_CASE("config files") {
  const auto dir = oracle::scratch_dir("cli_config");
  {
    std::ofstream cfg(dir / "mem.cfg");
    cfg << "# table row\nn = 1871031\nd-e = 64\nc = 256\nm = 8\n";
  }
  const auto from_file = run({"mem-report", "--config", (dir / "mem.cfg").string(), "--m", "16"});
  REQUIRE_MESSAGE(from_file.rc == 0, from_file.err);
  CHECK(from_file.out.find("code_mib 28.55") != std::string::npos);
  CHECK(from_file.out.find("config: m=16") != std::string::npos);

  {
    std::ofstream cfg(dir / "bad.cfg");
    cfg << "n = 10\nbogus = 1\n";
  }
  const auto bad = run({"mem-report", "--config", (dir / "bad.cfg").string()});
  CHECK(bad.rc != 0);
  CHECK(bad.err.find("unknown key 'bogus'") != std::string::npos);

  const auto saved = run({"mem-report", "--n", "1000", "--variant", "full", "--save-config",
                          (dir / "saved.cfg").string()});
  REQUIRE(saved.rc == 0);
  const auto replay = run({"mem-report", "--config", (dir / "saved.cfg").string()});
  REQUIRE(replay.rc == 0);
  CHECK(replay.out == saved.out);
}

TEST_CASE("synth and training commands are reproducible") {
  const auto dir = oracle::scratch_dir("cli_pipeline");
  const auto p = [&](const char* name) { return (dir / name).string(); };
  const auto sbm = [&](const std::string& suffix) {
    return run({"synth-sbm", "--communities", "2", "--nodes-per-community", "10", "--p-in", "1",
                "--p-out", "0", "--seed", "3", "--edges-out", p("g.tsv") + suffix, "--labels-out",
                p("labels.txt") + suffix, "--splits-out", p("splits.txt") + suffix});
  };
  REQUIRE(sbm("").rc == 0);
  REQUIRE(sbm(".2").rc == 0);
  CHECK(slurp(p("g.tsv")) == slurp(p("g.tsv.2")));
  CHECK(slurp(p("splits.txt")) == slurp(p("splits.txt.2")));

  REQUIRE(run({"encode", "--edges", p("g.tsv"), "--c", "16", "--m", "4", "--seed", "1", "--out",
               p("codes.gecc")}).rc == 0);

  const std::vector<std::string> node_args{
      "train-node", "--edges", p("g.tsv"), "--labels", p("labels.txt"), "--splits",
      p("splits.txt"), "--codes", p("codes.gecc"), "--d-c", "16", "--d-m", "16", "--d-e", "16",
      "--l", "2", "--hidden", "16", "--k", "5", "--batch-size", "4", "--seed", "2"};
  const auto first = run(node_args);
  REQUIRE_MESSAGE(first.rc == 0, first.err);
  CHECK(first.out.find("note: hit@5 skipped") != std::string::npos);
  CHECK(first.out.find("test_acc 1.0000") != std::string::npos);
  const auto second = run(node_args);
  CHECK(harness::without_timing(second.out) == harness::without_timing(first.out));

  auto with_ks = node_args;
  with_ks.insert(with_ks.end(), {"--ks", "1,2"});
  const auto hits = run(with_ks);
  REQUIRE(hits.rc == 0);
  CHECK(hits.out.find("hit@2 1.0000") != std::string::npos);

  REQUIRE(run({"synth-emb", "--clusters", "2", "--points-per-cluster", "4", "--dim", "3", "--seed",
               "5", "--out", p("emb.gef32")}).rc == 0);
  REQUIRE(run({"encode", "--aux", p("emb.gef32"), "--c", "4", "--m", "2", "--out",
               p("emb.gecc")}).rc == 0);
  const std::vector<std::string> recon{"train-recon", "--codes", p("emb.gecc"), "--targets",
                                       p("emb.gef32"), "--d-c", "8", "--d-m", "8", "--l", "2",
                                       "--epochs", "20", "--batch-size", "4", "--seed", "9",
                                       "--out", p("dec")};
  const auto r1 = run(recon);
  REQUIRE_MESSAGE(r1.rc == 0, r1.err);
  const auto log1 = slurp(p("dec.loss.csv"));
  const auto bin1 = slurp(p("dec.bin"));
  CHECK(log1.rfind("epoch,loss\n1,", 0) == 0);
  CHECK(log1.find("nan") == std::string::npos);
  const auto r2 = run(recon);
  REQUIRE(r2.rc == 0);
  CHECK(slurp(p("dec.loss.csv")) == log1);
  CHECK(slurp(p("dec.bin")) == bin1);
  CHECK(harness::without_timing(r2.out) == harness::without_timing(r1.out));

  auto mismatch = recon;
  mismatch[2] = p("codes.gecc");
  CHECK(run(mismatch).rc == 1);

  const std::vector<std::string> coll{"collisions", "--aux", p("emb.gef32"), "--bits", "4",
                                      "--trials", "3", "--seed", "1", "--out", p("c.csv")};
  REQUIRE(run(coll).rc == 0);
  const auto csv = slurp(p("c.csv"));
  REQUIRE(run(coll).rc == 0);
  CHECK(slurp(p("c.csv")) == csv);
}

TEST_CASE("usage errors exit non-zero") {
  CHECK(run({}).rc != 0);
  CHECK(run({"frobnicate"}).rc != 0);
  CHECK(run({"encode", "--c", "4"}).rc != 0);
  CHECK(run({"encode", "--edges", "/nonexistent/file", "--out", "/tmp/x"}).rc != 0);
}
