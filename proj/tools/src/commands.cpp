#include "commands.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "ndecode/architecture.hpp"
#include "ndecode/binary_io.hpp"
#include "ndecode/error.hpp"
#include "ndecode/experiment.hpp"
#include "ndecode/retrieval.hpp"
#include "ndecode/similarity.hpp"
#include "ndecode/synthetic_cohort.hpp"
#include "ndecode/trainer.hpp"

namespace ndecode::cli {

namespace fs = std::filesystem;

namespace {

constexpr const char* kStimuliFile = "stimuli.ndpk";
constexpr const char* kTrainPack = "train.ndpk";
constexpr const char* kTestPack = "test.ndpk";
constexpr const char* kWeightsFile = "encoder.ndwt";

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  require(static_cast<bool>(out), ErrorKind::io, "cannot write " + path.string());
  out << text;
  out.flush();
  require(static_cast<bool>(out), ErrorKind::io, "failed writing " + path.string());
}

void prepare_out(const Context& ctx, const char* command) {
  std::error_code ec;
  fs::create_directories(ctx.out_dir, ec);
  require(!ec, ErrorKind::io, "cannot create " + ctx.out_dir.string() + ": " + ec.message());
  write_text(ctx.out_dir / (std::string(command) + ".ini"), dump_config(ctx.config));
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

std::string subject_file(SubjectId id) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "subject_%03u.ndvol", id);
  return buf;
}

// Rows of cells rendered either as comma-separated lines or as a space-aligned table.
std::string render(const std::vector<std::vector<std::string>>& rows, Format format) {
  std::ostringstream os;
  if (format == Format::csv) {
    for (const auto& r : rows) {
      for (std::size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << r[i];
      os << '\n';
    }
    return os.str();
  }
  std::vector<std::size_t> width;
  for (const auto& r : rows)
    for (std::size_t i = 0; i < r.size(); ++i) {
      if (width.size() <= i) width.push_back(0);
      width[i] = std::max(width[i], r[i].size());
    }
  for (const auto& r : rows) {
    std::string line;
    for (std::size_t i = 0; i < r.size(); ++i) {
      line += r[i];
      if (i + 1 < r.size()) line += std::string(width[i] - r[i].size() + 2, ' ');
    }
    os << line << '\n';
  }
  return os.str();
}

const char* report_ext(Format f) { return f == Format::csv ? ".csv" : ".txt"; }

void emit(const Context& ctx, std::ostream& log, const std::string& name,
          const std::vector<std::vector<std::string>>& rows) {
  const std::string text = render(rows, ctx.format);
  write_text(ctx.out_dir / (name + report_ext(ctx.format)), text);
  log << text;
}

PairSet read_pack(const Context& ctx, const char* name) { return read_ndpk(ctx.in_dir / name); }

std::vector<SubjectId> require_subjects(const PairSet& pack, const std::vector<SubjectId>& wanted, const char* key) {
  const auto present = pack.subject_ids();
  if (wanted.empty()) return present;
  for (SubjectId s : wanted)
    require(std::binary_search(present.begin(), present.end(), s), ErrorKind::config,
            std::string(key) + " lists subject " + std::to_string(s) + ", which is not in the pack");
  return wanted;
}

}  // namespace

int cmd_gen_cohort(const Context& ctx, std::ostream& log) {
  const auto& c = ctx.config.cohort;
  CohortConfig model = c.model;
  model.voxel_dim = c.dims.count();
  model.validate();
  require(c.n_trs >= 1, ErrorKind::config, "cohort.n_trs must be at least 1");
  require(c.tr_seconds > 0.0, ErrorKind::config, "cohort.tr_seconds must be positive");
  prepare_out(ctx, "gen-cohort");

  const auto subjects = gen_cohort(model);
  const auto stimuli = gen_stimuli(c.n_trs, model.latent_dim, c.stimulus_seed);

  // The stimulus shown at TR t has id t; each TR holds the response to its own stimulus.
  for (const auto& s : subjects) {
    VolumeSeries series;
    series.subject_id = s.subject_id;
    series.tr_seconds = c.tr_seconds;
    for (const auto& st : stimuli) {
      const Vector r = simulate_response(s, st.embedding, response_noise_seed(c.noise_seed, s.subject_id, st.id));
      series.grids.emplace_back(c.dims, std::vector<double>(r.data(), r.data() + r.size()));
    }
    write_ndvol(ctx.out_dir / subject_file(s.subject_id), series);
  }

  PairSet stim_pack;
  stim_pack.embed_dim = model.latent_dim;
  stim_pack.voxel_dim = 0;
  for (const auto& st : stimuli)
    stim_pack.records.push_back(
        {st.id, 0, std::vector<double>(st.embedding.data(), st.embedding.data() + st.embedding.size()), {}});
  write_ndpk(ctx.out_dir / kStimuliFile, stim_pack);

  log << "wrote " << subjects.size() << " subjects x " << c.n_trs << " TRs (" << c.dims.x << 'x' << c.dims.y << 'x'
      << c.dims.z << ") and " << stimuli.size() << " stimuli to " << ctx.out_dir.string() << '\n';
  return 0;
}

int cmd_build_pairs(const Context& ctx, std::ostream& log) {
  const auto& p = ctx.config.pairs;
  std::vector<fs::path> files;
  std::error_code ec;
  for (const auto& entry : fs::directory_iterator(ctx.in_dir, ec))
    if (entry.path().extension() == ".ndvol") files.push_back(entry.path());
  require(!ec, ErrorKind::io, "cannot list " + ctx.in_dir.string() + ": " + ec.message());
  require(!files.empty(), ErrorKind::data, "no .ndvol files in " + ctx.in_dir.string());
  std::sort(files.begin(), files.end());

  std::vector<VolumeSeries> series;
  for (const auto& f : files) series.push_back(read_ndvol(f));
  EmbeddingTable table;
  for (auto& r : read_pack(ctx, kStimuliFile).records) table[r.stimulus_id] = std::move(r.embedding);

  prepare_out(ctx, "build-pairs");
  const PairSet pairs = build_pairs(series, table, p.pairing);
  const TrainTestSplit split = split_train_test(pairs, p.n_test, p.split_seed);
  write_ndpk(ctx.out_dir / kTrainPack, split.train);
  write_ndpk(ctx.out_dir / kTestPack, split.test);

  log << series.size() << " subjects, " << pairs.records.size() << " pairs (" << split.train.records.size()
      << " train, " << split.test.records.size() << " test over " << split.test_stimuli.size() << " stimuli)\n";
  return 0;
}

int cmd_train(const Context& ctx, std::ostream& log) {
  const auto& cfg = ctx.config;
  cfg.train.train.validate();
  PairSet train_pack = read_pack(ctx, kTrainPack);
  PairSet test_pack = read_pack(ctx, kTestPack);
  const auto subjects = require_subjects(train_pack, cfg.train.subjects, "train.subjects");
  train_pack = train_pack.filter_subjects(subjects);
  test_pack = test_pack.filter_subjects(subjects);

  prepare_out(ctx, "train");
  const auto init = init_params(encoder_dims(train_pack.voxel_dim, cfg.encoder.hidden, train_pack.embed_dim),
                                cfg.encoder.init_seed);
  const TrainResult result = train(train_pack, test_pack, init, cfg.train.train);
  write_ndwt(ctx.out_dir / kWeightsFile, result.params);
  write_text(ctx.out_dir / "history.log", result.history.log_lines());

  std::vector<std::vector<std::string>> rows{{"epoch", "mean_loss", "eval_top1", "eval_top3"}};
  for (const auto& e : result.history.epochs)
    rows.push_back({std::to_string(e.epoch), num(e.mean_loss), e.eval_top1 < 0 ? "-" : num(e.eval_top1),
                    e.eval_top3 < 0 ? "-" : num(e.eval_top3)});
  emit(ctx, log, "epochs", rows);
  return 0;
}

int cmd_eval(const Context& ctx, std::ostream& log) {
  const auto& e = ctx.config.eval;
  const EncoderParams params = read_ndwt(ctx.in_dir / kWeightsFile);
  const PairSet test = read_pack(ctx, kTestPack);
  require(params.input_dim() == test.voxel_dim && params.output_dim() == test.embed_dim, ErrorKind::data,
          "checkpoint dims do not match the test pack");
  prepare_out(ctx, "eval");

  // top1 and top3 are always reported; other cut-offs in eval.ks get their own columns.
  std::vector<std::size_t> extra;
  for (std::size_t k : e.ks)
    if (k != 1 && k != 3 && std::find(extra.begin(), extra.end(), k) == extra.end()) extra.push_back(k);
  std::vector<std::vector<std::string>> rows{{"subject_id", "top1", "top3", "n_queries"}};
  for (std::size_t k : extra) rows[0].push_back("top" + std::to_string(k));
  if (e.subsample > 0) rows[0].push_back("subsample_top" + std::to_string(e.subsample_k));

  std::vector<double> sums(2 + extra.size() + (e.subsample > 0 ? 1 : 0), 0.0);
  const auto subjects = test.subject_ids();
  for (SubjectId s : subjects) {
    const PairSet mine = test.filter_subjects({s});
    const RetrievalReport r = evaluate_encoder(params, mine, extra);
    std::vector<double> values{r.top1, r.top3};
    for (const auto& [k, acc] : r.accuracy_at) values.push_back(acc);
    if (e.subsample > 0) {
      std::vector<StimulusId> ids;
      for (const auto& rec : mine.records) ids.push_back(rec.stimulus_id);
      values.push_back(eval_subsample(mlp_forward(params, mine.voxel_matrix()), ids, gallery_from_pairs(mine),
                                      e.subsample, e.trials, e.subsample_k, derive_seed(e.seed, s))
                           .mean);
    }
    std::vector<std::string> row{std::to_string(s), num(values[0]), num(values[1]), std::to_string(r.n_queries())};
    for (std::size_t i = 2; i < values.size(); ++i) row.push_back(num(values[i]));
    for (std::size_t i = 0; i < values.size(); ++i) sums[i] += values[i];
    rows.push_back(row);
  }
  const double n = static_cast<double>(subjects.size());
  std::vector<std::string> mean{"mean", num(sums[0] / n), num(sums[1] / n), "-"};
  for (std::size_t i = 2; i < sums.size(); ++i) mean.push_back(num(sums[i] / n));
  rows.push_back(mean);
  emit(ctx, log, "eval", rows);
  return 0;
}

int cmd_similarity(const Context& ctx, std::ostream& log) {
  const auto& s = ctx.config.similarity;
  const PairSet pack = read_pack(ctx, kTrainPack);
  const auto present = pack.subject_ids();
  require(std::binary_search(present.begin(), present.end(), s.target), ErrorKind::config,
          "similarity target " + std::to_string(s.target) + " is not in the pack");
  prepare_out(ctx, "similarity");

  const auto responses = responses_by_subject(pack);
  const SubjectResponses* target = nullptr;
  std::vector<SubjectResponses> candidates;
  const auto wanted = require_subjects(pack, s.candidates, "similarity.candidates");
  for (const auto& r : responses) {
    if (r.subject_id == s.target)
      target = &r;
    else if (std::find(wanted.begin(), wanted.end(), r.subject_id) != wanted.end())
      candidates.push_back(r);
  }

  if (s.method == "mean") {
    const auto means = mean_similarity(*target, candidates);
    std::vector<std::pair<SubjectId, double>> order(means.begin(), means.end());
    std::stable_sort(order.begin(), order.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
    std::vector<std::vector<std::string>> rows{{"subject_id", "mean_similarity"}};
    for (const auto& [id, v] : order) rows.push_back({std::to_string(id), num(v)});
    emit(ctx, log, "similarity", rows);
    return 0;
  }

  const RankCreditTable table = rank_credit(*target, candidates, s.top_k);
  std::vector<std::vector<std::string>> rows{{"subject_id", "credits"}};
  for (const auto& [id, c] : table.ranked()) rows.push_back({std::to_string(id), std::to_string(c)});
  emit(ctx, log, "similarity", rows);
  if (s.select > 0) {
    const auto mode = s.mode == "least_similar" ? SelectionMode::least_similar : SelectionMode::most_similar;
    std::string ids;
    for (SubjectId id : select_subjects(table, s.select, mode)) ids += (ids.empty() ? "" : ",") + std::to_string(id);
    write_text(ctx.out_dir / "selection.txt", ids + "\n");
    log << s.mode << ": " << ids << '\n';
  }
  return 0;
}

int cmd_shape_check(const Context& ctx, std::ostream& log) {
  prepare_out(ctx, "shape-check");
  auto shape = [](const Shape& s) {
    std::string out;
    for (std::size_t i = 0; i < s.size(); ++i) out += (i ? "x" : "") + std::to_string(s[i]);
    return out;
  };
  std::vector<std::vector<std::string>> rows{{"table", "layer", "kind", "input", "computed", "expected", "status"}};
  std::size_t failures = 0;
  for (const auto& t : builtin_tables()) {
    const ArchReport report = validate_architecture(t);
    failures += report.failures();
    for (const auto& r : report.rows)
      rows.push_back({t.name, r.layer_name, to_string(r.kind), shape(r.input), shape(r.computed), shape(r.expected),
                      r.pass ? "ok" : "MISMATCH"});
  }
  emit(ctx, log, "shape_check", rows);
  log << failures << " mismatched rows\n";
  return failures == 0 ? 0 : 2;  // architecture mismatch, same code as a config error
}

int cmd_sweep(const Context& ctx, std::ostream& log) {
  const auto& cfg = ctx.config;
  const PairSet train_pack = read_pack(ctx, kTrainPack);
  const PairSet test_pack = read_pack(ctx, kTestPack);
  require(!cfg.sweep.unseen.empty(), ErrorKind::config, "sweep.unseen must list at least one held-out subject");
  const auto unseen = require_subjects(train_pack, cfg.sweep.unseen, "sweep.unseen");
  std::vector<SubjectId> pool = cfg.sweep.seen_pool;
  if (pool.empty())
    for (SubjectId s : train_pack.subject_ids())
      if (std::find(unseen.begin(), unseen.end(), s) == unseen.end()) pool.push_back(s);
  require_subjects(train_pack, pool, "sweep.seen_pool");

  CountSweepConfig sweep;
  sweep.grid = cfg.sweep.grid;
  sweep.seeds = cfg.sweep.seeds;
  sweep.seen_pool = pool;
  sweep.unseen = unseen;
  sweep.hidden = cfg.encoder.hidden;
  sweep.train = cfg.train.train;
  sweep.shuffle_pool = cfg.sweep.shuffle_pool;
  sweep.threads = ctx.threads;
  prepare_out(ctx, "sweep");

  const auto points = run_count_sweep(train_pack, test_pack, sweep);
  std::vector<std::vector<std::string>> rows{{"n_subjects", "seed", "top1", "top3"}};
  for (const auto& p : points)
    rows.push_back({std::to_string(p.n_subjects), std::to_string(p.seed), num(p.result.unseen_top1),
                    num(p.result.unseen_top3)});
  emit(ctx, log, "sweep", rows);
  return 0;
}

}  // namespace ndecode::cli
