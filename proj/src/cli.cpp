#include "rfsum/cli.hpp"

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <numeric>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "rfsum/baselines.hpp"
#include "rfsum/checkpoint.hpp"
#include "rfsum/corpus.hpp"
#include "rfsum/embeddings.hpp"
#include "rfsum/errors.hpp"
#include "rfsum/inference.hpp"
#include "rfsum/model.hpp"
#include "rfsum/rouge.hpp"
#include "rfsum/training.hpp"

namespace rfsum {
namespace {

Variant parse_variant(const std::string& name) {
  if (name == "plain") return Variant::Plain;
  if (name == "prepend" || name == "prepend-background") return Variant::PrependBackground;
  if (name == "gated" || name == "background-gated") return Variant::BackgroundGated;
  throw InvalidArgument("unknown variant '" + name +
                        "' (expected plain, prepend-background or background-gated)");
}

struct SplitFlags {
  double train = 0.7, dev = 0.1, test = 0.2;
  std::uint64_t seed = 1;
};

// which: one of train/dev/test, or "all" for the unsplit corpus.
std::vector<Report> pick_split(const std::vector<Report>& reports,
                               const SplitFlags& f, const std::string& which) {
  if (which == "all") return reports;
  auto split = split_corpus(reports, f.train, f.dev, f.test, f.seed);
  if (which == "train") return split.train;
  if (which == "dev") return split.dev;
  if (which == "test") return split.test;
  throw InvalidArgument("unknown split '" + which +
                        "' (expected train, dev, test or all)");
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << text;
  if (!out) throw IoError("failed while writing " + path);
}

std::string json_escape(const std::string& s) {
  return nlohmann::json(s).dump();
}

// ---------------------------------------------------------------- ingest --

struct IngestOpts {
  std::string input, output;
  int max_per_part = 0;
  std::uint64_t seed = 1;
};

void cmd_ingest(const IngestOpts& o) {
  IngestResult res = ingest_corpus_file(o.input);
  if (res.ledger.total() == 0) {
    std::cout << "warning: input contained no records\n";
  }
  std::cout << "read " << res.ledger.total() << " records: kept "
            << res.ledger.kept() << ", dropped " << res.ledger.dropped.size() << "\n";

  std::map<std::string, int> by_reason;
  for (const auto& [tag, reason] : res.ledger.dropped) {
    ++by_reason[drop_reason_name(reason)];
  }
  for (const auto& [reason, count] : by_reason) {
    std::cout << "  dropped " << reason << ": " << count << "\n";
  }
  if (!res.ledger.kept_per_part.empty()) {
    std::cout << "kept per body part:\n";
    for (const auto& [part, count] : res.ledger.kept_per_part) {
      std::cout << "  " << part << ": " << count << "\n";
    }
  }

  std::vector<Report> final_reports = res.reports;
  if (o.max_per_part > 0) {
    final_reports = cap_per_body_part(final_reports, o.max_per_part, o.seed);
    std::cout << "capped at " << o.max_per_part << " per body part: kept "
              << final_reports.size() << " (dropped "
              << res.reports.size() - final_reports.size() << " by cap)\n";
  }
  write_corpus(o.output, final_reports);
  std::cout << "wrote " << final_reports.size() << " reports to " << o.output << "\n";
}

// ----------------------------------------------------------------- train --

struct TrainOpts {
  std::string corpus, out;
  std::string variant = "background-gated";
  std::string vectors, save_vocab, save_state, resume;
  SplitFlags split;
  ModelConfig mc;
  TrainConfig tc;
  int vocab_size = 50000;
  int min_count = 1;
  std::uint64_t model_seed = 1;
  // Which flags the user actually passed (for resume overrides).
  bool epochs_set = false, patience_set = false, lr_set = false,
       batch_set = false, clip_set = false;
};

void cmd_train(const TrainOpts& o) {
  auto reports = read_corpus(o.corpus);
  auto split = split_corpus(reports, o.split.train, o.split.dev, o.split.test,
                            o.split.seed);

  Model model;
  TrainState state;
  TrainConfig cfg = o.tc;
  if (!o.resume.empty()) {
    TrainCheckpoint ck = load_train_checkpoint(o.resume);
    model = std::move(ck.current);
    state = std::move(ck.state);
    cfg = ck.config;  // explicit flags below override the stored values
    if (o.epochs_set) cfg.max_epochs = o.tc.max_epochs;
    if (o.patience_set) cfg.patience = o.tc.patience;
    if (o.lr_set) cfg.lr = o.tc.lr;
    if (o.batch_set) cfg.batch_size = o.tc.batch_size;
    if (o.clip_set) cfg.clip = o.tc.clip;
    std::cout << "resumed at epoch " << state.next_epoch << " (best dev "
              << state.best_dev << " at epoch " << state.best_epoch << ")\n";
  } else {
    ModelConfig mc = o.mc;
    mc.variant = parse_variant(o.variant);
    Vocabulary vocab = build_vocab(split.train, o.vocab_size, o.min_count);
    model = init_model(mc, vocab, o.model_seed);
    if (!o.vectors.empty()) {
      int matched = load_pretrained(o.vectors, vocab, model.embedding);
      std::cout << "pretrained vectors: " << matched << "/" << vocab.size()
                << " vocabulary tokens matched\n";
    }
  }
  if (!o.save_vocab.empty()) model.vocab.save(o.save_vocab);

  std::cout << "training '" << variant_name(model.cfg.variant) << "' on "
            << split.train.size() << " train / " << split.dev.size()
            << " dev reports (vocab " << model.vocab.size() << ")\n";
  train(model, split.train, split.dev, cfg, state, [](const EpochLog& log) {
    std::printf("epoch %d  train_nll %.6f  dev_nll %.6f%s\n", log.epoch,
                log.train_nll, log.dev_nll, log.improved ? "  *" : "");
    std::fflush(stdout);
  });

  save_model_checkpoint(o.out, state.best, state.best_epoch, state.best_dev);
  std::cout << "best epoch " << state.best_epoch << " dev_nll " << state.best_dev
            << " -> " << o.out << "\n";
  if (!o.save_state.empty()) {
    save_train_checkpoint(o.save_state, model, state, cfg);
    std::cout << "training state -> " << o.save_state << "\n";
  }
}

// ------------------------------------------------------------ evaluation --

struct ScoredSet {
  std::vector<std::string> ids;
  std::vector<Tokens> predictions;
  std::vector<Tokens> references;
};

// Predictions for a whole split, in id order. The worker must be pure per
// report; failures are collected and the first one is rethrown serially.
template <typename Fn>
ScoredSet predict_split(std::vector<Report> reports, const Fn& worker) {
  if (reports.empty()) throw EmptySplit("no reports in the requested split");
  std::sort(reports.begin(), reports.end(),
            [](const Report& a, const Report& b) { return a.id < b.id; });
  ScoredSet out;
  out.ids.resize(reports.size());
  out.predictions.resize(reports.size());
  out.references.resize(reports.size());
  std::string first_error_category, first_error_detail;
  bool failed = false;
#pragma omp parallel for schedule(dynamic)
  for (size_t i = 0; i < reports.size(); ++i) {
    try {
      out.ids[i] = reports[i].id;
      out.references[i] = reports[i].impression;
      out.predictions[i] = worker(reports[i]);
    } catch (const Error& e) {
#pragma omp critical
      if (!failed) {
        failed = true;
        first_error_category = e.category();
        first_error_detail = e.what();
      }
    } catch (const std::exception& e) {
#pragma omp critical
      if (!failed) {
        failed = true;
        first_error_category = "Internal";
        first_error_detail = e.what();
      }
    }
  }
  if (failed) throw Error(first_error_category, first_error_detail);
  return out;
}

void write_predictions(const std::string& path, const ScoredSet& s) {
  std::string lines;
  for (size_t i = 0; i < s.ids.size(); ++i) {
    lines += "{\"id\":" + json_escape(s.ids[i]) +
             ",\"prediction\":" + json_escape(detokenize(s.predictions[i])) +
             ",\"reference\":" + json_escape(detokenize(s.references[i])) + "}\n";
  }
  write_text_file(path, lines);
}

void emit_report(const std::string& out_path, const std::string& label,
                 const ScoredSet& s, int bootstrap, std::uint64_t rouge_seed) {
  CorpusRouge scores = corpus_rouge(s.predictions, s.references, bootstrap, rouge_seed);
  std::string json = rouge_report_json(scores);
  char summary[160];
  std::snprintf(summary, sizeof(summary),
                "%s: %zu reports  rouge1 %.2f  rouge2 %.2f  rougeL %.2f",
                label.c_str(), s.ids.size(), scores.rouge1.mean_f1,
                scores.rouge2.mean_f1, scores.rougeL.mean_f1);
  if (out_path.empty()) {
    std::cerr << summary << "\n";
    std::cout << json << "\n";
  } else {
    write_text_file(out_path, json + "\n");
    std::cout << summary << "\n" << "report -> " << out_path << "\n";
  }
}

struct EvalOpts {
  std::string checkpoint, corpus, vocab;
  std::string split = "test";
  SplitFlags split_flags;
  int beam = 5;
  int max_len = 100;
  std::string out, predictions;
  int bootstrap = 1000;
  std::uint64_t rouge_seed = 17;
};

void cmd_eval(const EvalOpts& o) {
  ModelCheckpoint ck = load_model_checkpoint(o.checkpoint);
  if (!o.vocab.empty()) {
    Vocabulary v = Vocabulary::load(o.vocab);
    if (v.hash() != ck.model.vocab.hash()) {
      throw VocabMismatch("vocabulary file " + o.vocab +
                          " does not match the checkpoint's vocabulary");
    }
  }
  auto reports = read_corpus(o.corpus);
  auto chosen = pick_split(reports, o.split_flags, o.split);
  const Model& model = ck.model;
  ScoredSet s = predict_split(std::move(chosen), [&](const Report& r) {
    return summarize_tokens(model, r, o.beam, o.max_len);
  });
  if (!o.predictions.empty()) write_predictions(o.predictions, s);
  emit_report(o.out, "eval " + o.split, s, o.bootstrap, o.rouge_seed);
}

// ------------------------------------------------------------- summarize --

struct SummarizeOpts {
  std::string checkpoint;
  int beam = 5;
  int max_len = 100;
};

void cmd_summarize(const SummarizeOpts& o) {
  ModelCheckpoint ck = load_model_checkpoint(o.checkpoint);
  std::string line, text;
  while (std::getline(std::cin, line)) {
    if (line.find_first_not_of(" \t\r\n") != std::string::npos) {
      text = line;
      break;
    }
  }
  if (text.empty()) throw EmptyInput("no report on standard input");
  Report r = parse_report(text);
  std::cout << summarize(ck.model, r, o.beam, o.max_len) << "\n";
}

// -------------------------------------------------------------- baseline --

struct BaselineOpts {
  std::string method, corpus;
  std::string split = "test";
  SplitFlags split_flags;
  int sentences = 3;
  std::string out, predictions;
  int bootstrap = 1000;
  std::uint64_t rouge_seed = 17;
};

void cmd_baseline(const BaselineOpts& o) {
  if (o.method != "lexrank" && o.method != "lsa") {
    throw UnknownMethod("no baseline named '" + o.method + "'");
  }
  auto reports = read_corpus(o.corpus);
  auto chosen = pick_split(reports, o.split_flags, o.split);
  ScoredSet s = predict_split(std::move(chosen), [&](const Report& r) {
    return baseline_summary(o.method, r.findings, o.sentences);
  });
  if (!o.predictions.empty()) write_predictions(o.predictions, s);
  emit_report(o.out, o.method + " " + o.split, s, o.bootstrap, o.rouge_seed);
}

// --------------------------------------------------------- gen-synthetic --

struct GenOpts {
  std::string out;
  int count = 1000;
  std::uint64_t seed = 1;
};

void cmd_gen_synthetic(const GenOpts& o) {
  if (o.count <= 0) throw InvalidArgument("--count must be positive");
  auto reports = generate_synthetic_corpus(o.count, o.seed);
  write_corpus(o.out, reports);
  std::cout << "wrote " << reports.size() << " synthetic reports to " << o.out << "\n";
}

void add_split_flags(CLI::App* cmd, SplitFlags& f) {
  cmd->add_option("--train-frac", f.train, "Training fraction")->capture_default_str();
  cmd->add_option("--dev-frac", f.dev, "Development fraction")->capture_default_str();
  cmd->add_option("--test-frac", f.test, "Test fraction")->capture_default_str();
  cmd->add_option("--split-seed", f.seed, "Shuffle seed for the split")
      ->capture_default_str();
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"background-aware radiology findings summarizer"};
  app.require_subcommand(1);

  IngestOpts ing;
  auto* c_ing = app.add_subcommand("ingest", "Filter a raw corpus into canonical form");
  c_ing->add_option("--input", ing.input, "Raw corpus (JSON lines)")->required();
  c_ing->add_option("--output", ing.output, "Filtered corpus path")->required();
  c_ing->add_option("--max-per-part", ing.max_per_part,
                    "Random cap on reports per body part (0 = no cap)")
      ->capture_default_str();
  c_ing->add_option("--seed", ing.seed, "Seed for the per-part cap")
      ->capture_default_str();
  c_ing->callback([&] { cmd_ingest(ing); });

  TrainOpts tr;
  auto* c_tr = app.add_subcommand("train", "Train a summarization model");
  c_tr->add_option("--corpus", tr.corpus, "Canonical corpus path")->required();
  c_tr->add_option("--out", tr.out, "Best-model checkpoint path")->required();
  c_tr->add_option("--variant", tr.variant,
                   "plain, prepend-background or background-gated")
      ->capture_default_str();
  add_split_flags(c_tr, tr.split);
  c_tr->add_option("--emb-dim", tr.mc.emb_dim, "Embedding size")->capture_default_str();
  c_tr->add_option("--hidden", tr.mc.enc_hidden, "Encoder hidden size per direction")
      ->capture_default_str();
  c_tr->add_option("--layers", tr.mc.enc_layers, "Encoder layers")->capture_default_str();
  c_tr->add_option("--dec-hidden", tr.mc.dec_hidden, "Decoder hidden size")
      ->capture_default_str();
  c_tr->add_option("--attn-dim", tr.mc.attn_dim, "Attention size")->capture_default_str();
  c_tr->add_option("--vocab-size", tr.vocab_size, "Vocabulary cap (reserved included)")
      ->capture_default_str();
  c_tr->add_option("--min-count", tr.min_count, "Minimum token frequency")
      ->capture_default_str();
  auto* o_ep = c_tr->add_option("--epochs", tr.tc.max_epochs, "Epoch ceiling")
                   ->capture_default_str();
  auto* o_pa = c_tr->add_option("--patience", tr.tc.patience,
                                "Epochs without dev improvement before stopping")
                   ->capture_default_str();
  auto* o_lr = c_tr->add_option("--lr", tr.tc.lr, "Adam learning rate")
                   ->capture_default_str();
  auto* o_ba = c_tr->add_option("--batch-size", tr.tc.batch_size, "Batch size")
                   ->capture_default_str();
  auto* o_cl = c_tr->add_option("--clip", tr.tc.clip, "Gradient norm ceiling")
                   ->capture_default_str();
  c_tr->add_option("--seed", tr.tc.seed, "Shuffle/optimizer seed")->capture_default_str();
  c_tr->add_option("--model-seed", tr.model_seed, "Parameter init seed")
      ->capture_default_str();
  c_tr->add_option("--vectors", tr.vectors, "Pretrained embedding text file");
  c_tr->add_option("--save-vocab", tr.save_vocab, "Write the vocabulary here");
  c_tr->add_option("--save-state", tr.save_state, "Write a resumable training state here");
  c_tr->add_option("--resume", tr.resume,
                   "Resume from a training state (model flags are then ignored)");
  c_tr->callback([&, o_ep, o_pa, o_lr, o_ba, o_cl] {
    tr.epochs_set = o_ep->count() > 0;
    tr.patience_set = o_pa->count() > 0;
    tr.lr_set = o_lr->count() > 0;
    tr.batch_set = o_ba->count() > 0;
    tr.clip_set = o_cl->count() > 0;
    cmd_train(tr);
  });

  EvalOpts ev;
  auto* c_ev = app.add_subcommand("eval", "Score a checkpoint on a corpus split");
  c_ev->add_option("--checkpoint", ev.checkpoint, "Model checkpoint")->required();
  c_ev->add_option("--corpus", ev.corpus, "Canonical corpus path")->required();
  c_ev->add_option("--split", ev.split, "train, dev, test or all")->capture_default_str();
  add_split_flags(c_ev, ev.split_flags);
  c_ev->add_option("--beam", ev.beam, "Beam width")->capture_default_str();
  c_ev->add_option("--max-len", ev.max_len, "Summary length ceiling")
      ->capture_default_str();
  c_ev->add_option("--out", ev.out, "Write the score report here (default: stdout)");
  c_ev->add_option("--predictions", ev.predictions, "Write {id, prediction, reference} lines here");
  c_ev->add_option("--vocab", ev.vocab, "Vocabulary file that must match the checkpoint");
  c_ev->add_option("--bootstrap", ev.bootstrap, "Bootstrap resamples")
      ->capture_default_str();
  c_ev->add_option("--rouge-seed", ev.rouge_seed, "Bootstrap seed")->capture_default_str();
  c_ev->callback([&] { cmd_eval(ev); });

  SummarizeOpts su;
  auto* c_su = app.add_subcommand(
      "summarize", "Summarize one report read as JSON from standard input");
  c_su->add_option("--checkpoint", su.checkpoint, "Model checkpoint")->required();
  c_su->add_option("--beam", su.beam, "Beam width")->capture_default_str();
  c_su->add_option("--max-len", su.max_len, "Summary length ceiling")
      ->capture_default_str();
  c_su->callback([&] { cmd_summarize(su); });

  BaselineOpts ba;
  auto* c_ba = app.add_subcommand("baseline", "Score an extractive baseline on a split");
  c_ba->add_option("--method", ba.method, "lexrank or lsa")->required();
  c_ba->add_option("--corpus", ba.corpus, "Canonical corpus path")->required();
  c_ba->add_option("--split", ba.split, "train, dev, test or all")->capture_default_str();
  add_split_flags(c_ba, ba.split_flags);
  c_ba->add_option("--sentences", ba.sentences, "Sentences per summary")
      ->capture_default_str();
  c_ba->add_option("--out", ba.out, "Write the score report here (default: stdout)");
  c_ba->add_option("--predictions", ba.predictions, "Write {id, prediction, reference} lines here");
  c_ba->add_option("--bootstrap", ba.bootstrap, "Bootstrap resamples")
      ->capture_default_str();
  c_ba->add_option("--rouge-seed", ba.rouge_seed, "Bootstrap seed")->capture_default_str();
  c_ba->callback([&] { cmd_baseline(ba); });

  GenOpts gen;
  auto* c_gen = app.add_subcommand("gen-synthetic",
                                   "Generate a synthetic laterality corpus");
  c_gen->add_option("--out", gen.out, "Corpus path to write")->required();
  c_gen->add_option("--count", gen.count, "Number of reports")->capture_default_str();
  c_gen->add_option("--seed", gen.seed, "Generator seed")->capture_default_str();
  c_gen->callback([&] { cmd_gen_synthetic(gen); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const Error& e) {
    std::cerr << "error: " << e.category() << ": " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: Internal: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace rfsum
