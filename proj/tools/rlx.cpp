// Command-line front end. Subcommands: measure, gen, convert, index, bench.
// Exit codes: 0 success, 2 verification failure, 3 usage, 4 I/O.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "rlx/common.hpp"
#include "rlx/compressed_index.hpp"
#include "rlx/lbgen.hpp"
#include "rlx/lz2rlbwt.hpp"
#include "rlx/lz77.hpp"
#include "rlx/measures.hpp"
#include "rlx/rlslp.hpp"
#include "rlx/text.hpp"

namespace {

using nlohmann::json;

std::vector<std::string> expand_inputs(const std::vector<std::string>& paths) {
  namespace fs = std::filesystem;
  std::vector<std::string> files;
  for (const std::string& p : paths) {
    std::error_code ec;
    if (fs::is_directory(p, ec)) {
      std::vector<std::string> inside;
      for (const auto& entry : fs::directory_iterator(p, ec))
        if (entry.is_regular_file()) inside.push_back(entry.path().string());
      if (ec) rlx::fail_io("cannot list " + p + ": " + ec.message());
      std::sort(inside.begin(), inside.end());
      files.insert(files.end(), inside.begin(), inside.end());
    } else {
      files.push_back(p);
    }
  }
  if (files.empty()) rlx::fail_usage("no input files");
  return files;
}

std::string format_rat(const rlx::BoundReport& rep) {
  if (!rep.has_delta) return "NA";
  return std::to_string(rep.delta.num) + "/" + std::to_string(rep.delta.den);
}

json report_to_json(const rlx::BoundReport& rep) {
  json j;
  j["label"] = rep.label;
  j["n"] = rep.n;
  j["r"] = rep.r;
  j["r_rev"] = rep.r_rev;
  j["z"] = rep.z;
  if (rep.has_delta)
    j["delta"] = {{"num", rep.delta.num}, {"den", rep.delta.den}};
  else
    j["delta"] = nullptr;
  j["all_hold"] = rep.all_hold();
  json bounds = json::array();
  for (const rlx::BoundRecord& rec : rep.records)
    bounds.push_back({{"name", rec.bound_name},
                      {"lhs", rec.lhs},
                      {"rhs", rec.rhs},
                      {"constant", rec.constant_used},
                      {"holds", rec.holds}});
  j["bounds"] = std::move(bounds);
  return j;
}

void emit_reports(const std::vector<rlx::BoundReport>& reps, rlx::OutputFormat fmt) {
  switch (fmt) {
    case rlx::OutputFormat::Json: {
      json arr = json::array();
      for (const auto& rep : reps) arr.push_back(report_to_json(rep));
      std::cout << arr.dump(2) << "\n";
      break;
    }
    case rlx::OutputFormat::Csv: {
      std::cout << rlx::bound_report_csv_header() << "\n";
      for (const auto& rep : reps) std::cout << rlx::bound_report_to_csv(rep);
      break;
    }
    case rlx::OutputFormat::Text: {
      for (const auto& rep : reps) {
        std::cout << rep.label << ": n=" << rep.n << " r=" << rep.r << " r_rev=" << rep.r_rev
                  << " z=" << rep.z << " delta=" << format_rat(rep);
        if (rep.all_hold()) {
          std::cout << " bounds=ok\n";
        } else {
          std::cout << " bounds=VIOLATED:";
          for (const auto& rec : rep.records)
            if (!rec.holds) std::cout << ' ' << rec.bound_name;
          std::cout << "\n";
        }
      }
      break;
    }
  }
}

int cmd_measure(const std::vector<std::string>& paths, const rlx::Config& cfg) {
  std::vector<std::string> files = expand_inputs(paths);
  std::vector<std::future<rlx::BoundReport>> futs;
  futs.reserve(files.size());
  for (const std::string& f : files)
    futs.push_back(std::async(std::launch::async, [f, cfg] {
      rlx::Text t = rlx::Text::from_file(f);
      return rlx::verify_bounds(t, cfg, f);
    }));
  std::vector<rlx::BoundReport> reps;
  reps.reserve(futs.size());
  for (auto& fut : futs) reps.push_back(fut.get());
  emit_reports(reps, cfg.output_format);
  for (const auto& rep : reps)
    if (!rep.all_hold()) {
      std::cerr << "rlx: bound violations present\n";
      return 2;
    }
  return 0;
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) rlx::fail_io("cannot open " + path + " for writing");
  out << content;
  if (!out) rlx::fail_io("write error on " + path);
}

int cmd_gen(const std::string& family, std::int64_t delta, std::int64_t n, std::int64_t sigma,
            std::int64_t order, const std::string& out) {
  rlx::Text t;
  if (family == "small") {
    t = rlx::gen_small_delta({delta, n});
  } else if (family == "large") {
    t = rlx::gen_large_delta({delta, n});
  } else if (family == "debruijn") {
    t = rlx::Text::from_bytes(rlx::gen_de_bruijn(sigma, order));
  } else {
    rlx::fail_usage("unknown family: " + family);
  }
  write_file(out, t.bytes());
  std::cout << family << " n=" << t.size() << " -> " << out << "\n";
  return 0;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) rlx::fail_io("cannot open " + path);
  std::string raw((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) rlx::fail_io("read error on " + path);
  return raw;
}

void diff_against_oracle(const rlx::BwtRuns& got, const rlx::Lz77Parse& parse,
                         const std::string& what) {
  rlx::BwtRuns want = rlx::build_bwt_runs(rlx::lz77_decode(parse));
  if (got.n != want.n)
    rlx::fail_verify(what + ": length " + std::to_string(got.n) + " differs from oracle " +
                     std::to_string(want.n));
  if (got.r() != want.r())
    rlx::fail_verify(what + ": " + std::to_string(got.r()) + " runs differ from oracle " +
                     std::to_string(want.r()));
  for (std::size_t i = 0; i < got.runs.size(); ++i)
    if (got.runs[i].start != want.runs[i].start || got.runs[i].symbol != want.runs[i].symbol)
      rlx::fail_verify(what + ": run " + std::to_string(i + 1) + " differs from oracle");
}

int cmd_parse(const std::string& text_path, const std::string& out) {
  rlx::Text t = rlx::Text::from_file(text_path);
  rlx::Lz77Parse parse = rlx::lz77_parse(t);
  rlx::lz77_to_file(parse, out);
  std::cout << out << ": " << parse.z() << " phrases, n=" << t.size() << "\n";
  return 0;
}

int cmd_convert(const std::string& parse_path, const std::string& text_path,
                const std::string& out, bool verify, const std::string& check,
                const rlx::Config& cfg) {
  if (parse_path.empty() == text_path.empty())
    rlx::fail_usage("convert needs exactly one of --parse / --text");
  rlx::Lz77Parse parse = parse_path.empty()
                             ? rlx::lz77_parse(rlx::Text::from_file(text_path))
                             : rlx::lz77_from_file(parse_path);
  if (!check.empty()) {
    rlx::BwtRuns disk = rlx::bwt_runs_from_lines(read_file(check));
    diff_against_oracle(disk, parse, check);
    std::cout << check << ": ok (" << disk.r() << " runs, n=" << disk.n << ")\n";
    return 0;
  }
  if (out.empty()) rlx::fail_usage("convert needs --out (or --check)");
  rlx::BwtRuns runs = rlx::convert(parse, cfg.seed);
  write_file(out, rlx::bwt_runs_to_lines(runs));
  if (verify) {
    rlx::BwtRuns disk = rlx::bwt_runs_from_lines(read_file(out));
    diff_against_oracle(disk, parse, out);
  }
  std::cout << out << ": " << runs.r() << " runs, n=" << runs.n
            << (verify ? ", verified" : "") << "\n";
  return 0;
}

int cmd_index_build(const std::string& text_path, const std::string& parse_path,
                    const std::string& out) {
  if (text_path.empty() == parse_path.empty())
    rlx::fail_usage("index build needs exactly one of --text / --parse");
  rlx::Text t = text_path.empty() ? rlx::lz77_decode(rlx::lz77_from_file(parse_path))
                                  : rlx::Text::from_file(text_path);
  rlx::Rlslp g = rlx::recompress(t);
  write_file(out, rlx::rlslp_to_lines(g));
  std::cout << out << ": " << g.size() << " symbols, n=" << t.size() << "\n";
  return 0;
}

int cmd_index_query(const std::string& grammar_path, const std::string& op,
                    std::int64_t pat_start, std::int64_t pat_len) {
  std::ifstream in(grammar_path);
  if (!in) rlx::fail_io("cannot open " + grammar_path);
  rlx::Rlslp g = rlx::rlslp_from_lines(in);
  rlx::TextIndex index(std::move(g));
  const std::int64_t n = index.text_length();
  rlx::expect(pat_len >= 1, rlx::ErrorKind::Usage, "--pat-len must be positive");
  rlx::expect(pat_start >= 1 && pat_start - 1 + pat_len <= n, rlx::ErrorKind::Usage,
              "pattern window outside the text (positions are 1-based)");
  rlx::Fragment pat{pat_start - 1, pat_start - 1 + pat_len};

  json j;
  j["op"] = op;
  j["pat_start"] = pat_start;
  j["pat_len"] = pat_len;
  if (op == "report") {
    std::vector<std::int64_t> occ = index.report(pat);
    json arr = json::array();
    for (std::int64_t o : occ) arr.push_back(o + 1);
    j["result"] = std::move(arr);
  } else if (op == "leftmost") {
    j["result"] = index.leftmost(pat) + 1;
  } else if (op == "rightmost") {
    j["result"] = index.rightmost(pat) + 1;
  } else if (op == "count") {
    j["result"] = index.count(pat);
  } else {
    rlx::fail_usage("unknown op: " + op);
  }
  std::cout << j.dump() << "\n";
  return 0;
}

struct BenchRow {
  std::string label;
  std::int64_t n = 0;
  std::int64_t z = 0;
  std::int64_t r = 0;
  std::int64_t grammar_symbols = 0;
  std::int64_t rounds = 0;
  double parse_ms = 0;
  double grammar_ms = 0;
  double index_ms = 0;
  double convert_ms = 0;
};

// Bench runs files one at a time so stage timings do not contend.
int cmd_bench(const std::vector<std::string>& paths, const rlx::Config& cfg) {
  std::vector<std::string> files = expand_inputs(paths);
  using clock = std::chrono::steady_clock;
  auto ms = [](clock::time_point a, clock::time_point b) {
    return std::chrono::duration<double, std::milli>(b - a).count();
  };
  std::vector<BenchRow> rows;
  for (const std::string& f : files) {
    rlx::Text t = rlx::Text::from_file(f);
    BenchRow row;
    row.label = f;
    row.n = t.size();

    auto t0 = clock::now();
    rlx::Lz77Parse parse = rlx::lz77_parse(t);
    auto t1 = clock::now();
    rlx::Rlslp g = rlx::recompress(t);
    auto t2 = clock::now();
    rlx::TextIndex index(std::move(g));
    auto t3 = clock::now();
    std::vector<rlx::BwtModulo> trace;
    rlx::BwtRuns runs = rlx::convert(parse, cfg.seed, &trace);
    auto t4 = clock::now();

    row.z = parse.z();
    row.r = runs.r();
    row.grammar_symbols = index.queries().grammar().size();
    row.rounds = static_cast<std::int64_t>(trace.size()) - 1;
    row.parse_ms = ms(t0, t1);
    row.grammar_ms = ms(t1, t2);
    row.index_ms = ms(t2, t3);
    row.convert_ms = ms(t3, t4);
    rows.push_back(std::move(row));
  }

  switch (cfg.output_format) {
    case rlx::OutputFormat::Json: {
      json arr = json::array();
      for (const BenchRow& r : rows)
        arr.push_back({{"label", r.label},
                       {"n", r.n},
                       {"z", r.z},
                       {"r", r.r},
                       {"grammar_symbols", r.grammar_symbols},
                       {"rounds", r.rounds},
                       {"parse_ms", r.parse_ms},
                       {"grammar_ms", r.grammar_ms},
                       {"index_ms", r.index_ms},
                       {"convert_ms", r.convert_ms}});
      std::cout << arr.dump(2) << "\n";
      break;
    }
    case rlx::OutputFormat::Csv: {
      std::cout << "label,n,z,r,grammar_symbols,rounds,parse_ms,grammar_ms,index_ms,convert_ms\n";
      for (const BenchRow& r : rows)
        std::cout << r.label << ',' << r.n << ',' << r.z << ',' << r.r << ','
                  << r.grammar_symbols << ',' << r.rounds << ',' << r.parse_ms << ','
                  << r.grammar_ms << ',' << r.index_ms << ',' << r.convert_ms << "\n";
      break;
    }
    case rlx::OutputFormat::Text: {
      for (const BenchRow& r : rows)
        std::cout << r.label << ": n=" << r.n << " z=" << r.z << " r=" << r.r
                  << " grammar=" << r.grammar_symbols << " rounds=" << r.rounds
                  << " parse=" << r.parse_ms << "ms grammar=" << r.grammar_ms
                  << "ms index=" << r.index_ms << "ms convert=" << r.convert_ms << "ms\n";
      break;
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"compressed text indexing laboratory"};
  app.require_subcommand(1);
  app.fallthrough();

  rlx::Config cfg = rlx::config_from_env();
  std::string format_flag;
  app.add_option("--seed", cfg.seed, "seed for randomized pipeline stages");
  app.add_option("--format", format_flag, "output format: json, csv, text");
  app.add_option("--bound-constant", cfg.bound_constant, "constant C in bound checks");
  app.add_option("--delta-limit", cfg.delta_enumeration_limit,
                 "largest n whose delta is enumerated exactly");
  app.add_option("--retry-limit", cfg.retry_limit, "resample attempts for Las Vegas stages");

  std::vector<std::string> measure_paths;
  CLI::App* measure = app.add_subcommand("measure", "measure texts and check theorem bounds");
  measure->add_option("paths", measure_paths, "text files or directories")->required();

  std::string gen_family, gen_out;
  std::int64_t gen_delta = 4, gen_n = 16, gen_sigma = 2, gen_order = 3;
  CLI::App* gen = app.add_subcommand("gen", "generate lower-bound family texts");
  gen->add_option("--family", gen_family, "small, debruijn, or large")->required();
  gen->add_option("--out", gen_out, "output text file")->required();
  gen->add_option("--delta", gen_delta, "target substring-complexity bound (power of two)");
  gen->add_option("--n", gen_n, "target length (power of two)");
  gen->add_option("--sigma", gen_sigma, "de Bruijn alphabet size");
  gen->add_option("--order", gen_order, "de Bruijn order");

  std::string parse_text, parse_out;
  CLI::App* parsec = app.add_subcommand("parse", "factorize a text into its phrase parse");
  parsec->add_option("--text", parse_text, "input text file")->required();
  parsec->add_option("--out", parse_out, "output parse file")->required();

  std::string conv_parse, conv_text, conv_out, conv_check;
  bool conv_verify = false;
  CLI::App* conv = app.add_subcommand("convert", "convert a parse to its run-length encoded bwt");
  conv->add_option("--parse", conv_parse, "input parse file");
  conv->add_option("--text", conv_text, "input text file (parsed on the fly)");
  conv->add_option("--out", conv_out, "output run-length encoded bwt file");
  conv->add_flag("--verify", conv_verify, "re-read the output and diff against the oracle");
  conv->add_option("--check", conv_check, "verify an existing output file instead of converting");

  CLI::App* index = app.add_subcommand("index", "build and query the pattern-matching index");
  index->require_subcommand(1);
  std::string ib_text, ib_parse, ib_out;
  CLI::App* ibuild = index->add_subcommand("build", "build the grammar file");
  ibuild->add_option("--text", ib_text, "input text file");
  ibuild->add_option("--parse", ib_parse, "input parse file");
  ibuild->add_option("--out", ib_out, "output grammar file")->required();
  std::string iq_grammar, iq_op;
  std::int64_t iq_start = 0, iq_len = 0;
  CLI::App* iquery = index->add_subcommand("query", "query a built grammar file");
  iquery->add_option("--grammar", iq_grammar, "grammar file from index build")->required();
  iquery->add_option("--op", iq_op, "report, leftmost, rightmost, or count")->required();
  iquery->add_option("--pat-start", iq_start, "pattern start, 1-based text position")->required();
  iquery->add_option("--pat-len", iq_len, "pattern length")->required();

  std::vector<std::string> bench_paths;
  CLI::App* bench = app.add_subcommand("bench", "time the pipeline stages per text");
  bench->add_option("paths", bench_paths, "text files or directories")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 3;
  }

  try {
    if (!format_flag.empty()) cfg.output_format = rlx::parse_output_format(format_flag);
    cfg.check();
    if (measure->parsed()) return cmd_measure(measure_paths, cfg);
    if (gen->parsed()) return cmd_gen(gen_family, gen_delta, gen_n, gen_sigma, gen_order, gen_out);
    if (parsec->parsed()) return cmd_parse(parse_text, parse_out);
    if (conv->parsed())
      return cmd_convert(conv_parse, conv_text, conv_out, conv_verify, conv_check, cfg);
    if (index->parsed()) {
      if (ibuild->parsed()) return cmd_index_build(ib_text, ib_parse, ib_out);
      if (iquery->parsed()) return cmd_index_query(iq_grammar, iq_op, iq_start, iq_len);
    }
    if (bench->parsed()) return cmd_bench(bench_paths, cfg);
    rlx::fail_usage("no subcommand");
  } catch (const rlx::Error& e) {
    std::cerr << "rlx: " << e.what() << "\n";
    switch (e.kind()) {
      case rlx::ErrorKind::Verification:
        return 2;
      case rlx::ErrorKind::Usage:
        return 3;
      case rlx::ErrorKind::Io:
        return 4;
      case rlx::ErrorKind::Logic:
        return 1;
    }
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "rlx: internal error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
