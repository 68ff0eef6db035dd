#include <cstdio>
#include <string>

#include <CLI11.hpp>

#include "streamix/bench.hpp"
#include "streamix/oracle.hpp"

int main(int argc, char** argv) {
  CLI::App app{"streamix message-rate benchmark and matching oracle"};
  app.require_subcommand(1);

  streamix::bench::BenchConfig cfg;
  std::string mode = "pervci";
  auto* msgrate = app.add_subcommand("msgrate", "two-process multithread message-rate run");
  msgrate->add_option("--threads", cfg.threads, "paired threads per process")
      ->check(CLI::PositiveNumber);
  msgrate->add_option("--msg-bytes", cfg.msg_bytes, "payload bytes per message");
  msgrate->add_option("--iters", cfg.iters, "data messages per thread");
  msgrate->add_option("--window", cfg.window, "outstanding requests per batch");
  msgrate->add_option("--warmup", cfg.warmup, "untimed messages per thread");
  msgrate->add_option("--mode", mode, "locking regime: global|pervci|stream");
  msgrate->add_option("--csv", cfg.csv_path, "append result row to CSV file");

  int max_ops = 6;
  auto* oracle = app.add_subcommand("oracle", "exhaustive matching-order check against the reference matcher");
  oracle->add_option("--max-ops", max_ops, "per-rank operation cap (<= 6)")
      ->check(CLI::Range(0, 6));

  CLI11_PARSE(app, argc, argv);

  if (msgrate->parsed()) {
    auto m = streamix::bench::parse_mode(mode);
    if (!m) {
      std::fprintf(stderr, "unknown mode '%s' (use global|pervci|stream)\n", mode.c_str());
      return 2;
    }
    cfg.mode = *m;
    auto res = streamix::bench::run_msgrate(cfg);
    if (!res.ok()) {
      std::fprintf(stderr, "msgrate failed: %s\n",
                   std::string(streamix::to_string(res.error())).c_str());
      return 1;
    }
    std::printf("%s\n%s\n", streamix::bench::csv_header().c_str(),
                streamix::bench::csv_row(*res).c_str());
    return 0;
  }

  auto report = streamix::oracle::run_interleaving_oracle(max_ops);
  std::printf("program pairs: %llu\n", static_cast<unsigned long long>(report.program_pairs));
  std::printf("executions:    %llu\n", static_cast<unsigned long long>(report.executions));
  std::printf("divergences:   %llu\n", static_cast<unsigned long long>(report.divergences));
  if (report.divergences > 0)
    std::printf("first divergence: %s\n", report.first_divergence.c_str());
  return report.divergences == 0 ? 0 : 1;
}
