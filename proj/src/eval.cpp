#include "jsrda/eval.hpp"

#include "jsrda/error.hpp"
#include "jsrda/msda.hpp"
#include "jsrda/sparse.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <exception>
#include <fstream>
#include <iomanip>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

namespace jsrda {

namespace fs = std::filesystem;

namespace {

const char* kModule = "eval";

Matrix concat_columns(const std::vector<Matrix>& parts) {
  Index cols = 0;
  for (const auto& p : parts) cols += p.cols();
  Matrix out(parts.front().rows(), cols);
  Index offset = 0;
  for (const auto& p : parts) {
    out.middleCols(offset, p.cols()) = p;
    offset += p.cols();
  }
  return out;
}

Labels repeat_labels(const Labels& labels, std::size_t times) {
  Labels out;
  for (std::size_t i = 0; i < times; ++i) out.insert(out.end(), labels.begin(), labels.end());
  return out;
}

std::string format_percent(double v) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(1) << 100.0 * v;
  return os.str();
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream is(line);
  while (std::getline(is, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

HeldOutResult run_held_out(const MultiViewCorpus& corpus, const std::vector<std::size_t>& sources,
                           std::size_t target, int held_class, const ExperimentConfig& cfg) {
  corpus.validate();
  if (sources.empty()) throw Error(kModule, "no source views");
  for (auto s : sources) {
    if (s >= corpus.views.size()) throw Error(kModule, "source view index out of range");
    if (s == target) throw Error(kModule, "a source view equals the target view");
  }
  if (target >= corpus.views.size()) throw Error(kModule, "target view index out of range");

  const ClassSplit split = hold_out_class(corpus, held_class);
  const Labels& labels = corpus.labels();
  const Labels fl_labels = select_labels(labels, split.feature_learning);
  const Labels test_labels = select_labels(labels, split.test);

  std::vector<Matrix> raw;
  std::vector<Matrix> raw_fl;
  for (const auto& view : corpus.views) {
    raw.push_back(view.columns());
    raw_fl.push_back(select_columns(raw.back(), split.feature_learning));
  }

  // Shared + private features, fit on every view of the feature-learning pool.
  const SharedFeatureModel msda = SharedFeatureModel::fit(raw_fl, cfg.affinity, cfg.msda);

  std::vector<std::size_t> task_views = sources;
  task_views.push_back(target);
  std::vector<Matrix> features;
  std::vector<Matrix> features_fl;
  for (auto v : task_views) {
    features.push_back(msda.transform(raw[v]));
    features_fl.push_back(select_columns(features.back(), split.feature_learning));
  }

  // Transferable dictionaries over [sources; target]; every sample is then
  // coded against its own view's block.
  const TransferResult transfer = learn_transfer_dictionaries(features_fl, cfg.dict);
  std::vector<Matrix> codes;
  for (std::size_t i = 0; i < task_views.size(); ++i)
    codes.push_back(encode_view(transfer.dict.view_blocks[i], features[i], cfg.dict));

  std::vector<Matrix> source_codes_fl;
  std::vector<Labels> source_labels_fl;
  for (std::size_t i = 0; i < sources.size(); ++i) {
    source_codes_fl.push_back(select_columns(codes[i], split.feature_learning));
    source_labels_fl.push_back(fl_labels);
  }
  const Matrix target_codes_fl = select_columns(codes.back(), split.feature_learning);
  const AdaptResult adapted = adapt_loop(source_codes_fl, source_labels_fl, target_codes_fl,
                                         corpus.class_count, cfg.adapt);

  std::vector<Matrix> projected_sources;
  for (std::size_t i = 0; i < sources.size(); ++i)
    projected_sources.push_back(adapted.projections.project_source(i, codes[i]));
  const Matrix projected_test =
      adapted.projections.project_target(select_columns(codes.back(), split.test));
  const Labels predicted =
      nn_classify(concat_columns(projected_sources), repeat_labels(labels, sources.size()),
                  projected_test);

  std::vector<Matrix> raw_sources;
  for (auto s : sources) raw_sources.push_back(raw[s]);
  const Labels baseline_pred =
      nn_classify(concat_columns(raw_sources), repeat_labels(labels, sources.size()),
                  select_columns(raw[target], split.test));

  HeldOutResult res;
  res.held_class = held_class;
  res.accuracy = accuracy(predicted, test_labels);
  res.baseline = accuracy(baseline_pred, test_labels);
  res.test_count = static_cast<Index>(split.test.size());
  res.adapt_solves = adapted.gevp_solves;
  res.adapt_converged = adapted.converged;
  res.pseudo_history = adapted.pseudo_history;
  return res;
}

std::vector<HeldOutResult> run_cross_view(const MultiViewCorpus& corpus,
                                          const std::vector<std::size_t>& sources,
                                          std::size_t target, const ExperimentConfig& cfg,
                                          const std::vector<int>& held_classes) {
  std::vector<int> classes = held_classes;
  if (classes.empty())
    for (int c = 1; c <= corpus.class_count; ++c) classes.push_back(c);
  std::vector<HeldOutResult> out;
  for (int c : classes) out.push_back(run_held_out(corpus, sources, target, c, cfg));
  return out;
}

double within_view_accuracy(const MultiViewCorpus& corpus, std::size_t view, int held_class) {
  const ClassSplit split = hold_out_class(corpus, held_class);
  const Matrix x = corpus.views.at(view).columns();
  const Labels& labels = corpus.labels();
  const Labels pred = nn_classify(x, labels, select_columns(x, split.test));
  return accuracy(pred, select_labels(labels, split.test));
}

void ResultsTable::aggregate() {
  pairs.clear();
  std::map<std::pair<std::string, std::string>, std::size_t> index;
  std::vector<std::size_t> counts;
  double total_acc = 0.0;
  double total_base = 0.0;
  for (const auto& r : rows) {
    const auto key = std::make_pair(r.source, r.target);
    auto it = index.find(key);
    if (it == index.end()) {
      it = index.emplace(key, pairs.size()).first;
      pairs.push_back(PairSummary{r.source, r.target, 0.0, 0.0});
      counts.push_back(0);
    }
    pairs[it->second].accuracy += r.accuracy;
    pairs[it->second].baseline += r.baseline;
    ++counts[it->second];
    total_acc += r.accuracy;
    total_base += r.baseline;
  }
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    pairs[i].accuracy /= static_cast<double>(counts[i]);
    pairs[i].baseline /= static_cast<double>(counts[i]);
  }
  const double n = rows.empty() ? 1.0 : static_cast<double>(rows.size());
  mean_accuracy = total_acc / n;
  mean_baseline = total_base / n;
}

void ResultsTable::write_csv(const fs::path& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(kModule, "cannot write results: " + path.string());
  out << "source,target,held_class,accuracy,baseline_accuracy\n";
  for (const auto& r : rows) {
    out << r.source << ',' << r.target << ',' << r.held_class << ',' << format_exact(r.accuracy)
        << ',' << format_exact(r.baseline) << '\n';
  }
  for (const auto& p : pairs) {
    out << p.source << ',' << p.target << ",mean," << format_exact(p.accuracy) << ','
        << format_exact(p.baseline) << '\n';
  }
  out << "ALL,ALL,mean," << format_exact(mean_accuracy) << ',' << format_exact(mean_baseline)
      << '\n';
}

ResultsTable ResultsTable::read_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(kModule, "cannot open results: " + path.string());
  std::string line;
  if (!std::getline(in, line) || line.rfind("source,target,held_class", 0) != 0)
    throw Error(kModule, path.string() + ": missing results header");
  ResultsTable table;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != 5)
      throw Error(kModule, path.string() + ":" + std::to_string(line_no) + ": expected 5 columns");
    if (cells[2] == "mean") continue;  // aggregates are recomputed
    try {
      table.rows.push_back(ResultRow{cells[0], cells[1], std::stoi(cells[2]), std::stod(cells[3]),
                                     std::stod(cells[4])});
    } catch (const std::exception&) {
      throw Error(kModule, path.string() + ":" + std::to_string(line_no) + ": malformed row");
    }
  }
  table.aggregate();
  return table;
}

std::vector<TaskSpec> resolve_tasks(const MultiViewCorpus& corpus, const ExperimentConfig& cfg) {
  std::vector<TaskSpec> tasks;
  switch (cfg.mode) {
    case TaskMode::CrossView:
      for (const auto& s : corpus.views)
        for (const auto& t : corpus.views)
          if (s.id != t.id) tasks.push_back(TaskSpec{{s.id}, t.id});
      break;
    case TaskMode::MultiView:
      for (const auto& t : corpus.views) {
        TaskSpec spec;
        spec.target = t.id;
        for (const auto& s : corpus.views)
          if (s.id != t.id) spec.sources.push_back(s.id);
        tasks.push_back(std::move(spec));
      }
      break;
    case TaskMode::Explicit:
      tasks = cfg.tasks;
      break;
  }
  for (const auto& t : tasks) {
    corpus.view_index(t.target);
    std::set<std::string> seen;
    for (const auto& s : t.sources) {
      corpus.view_index(s);
      if (s == t.target) throw Error(kModule, "view '" + s + "' is both source and target");
      if (!seen.insert(s).second) throw Error(kModule, "duplicate source view '" + s + "'");
    }
  }
  return tasks;
}

ResultsTable run_protocol(const MultiViewCorpus& corpus, const ExperimentConfig& cfg, int jobs) {
  cfg.validate();
  corpus.validate();
  const auto tasks = resolve_tasks(corpus, cfg);
  std::vector<int> classes = cfg.held_classes;
  if (classes.empty())
    for (int c = 1; c <= corpus.class_count; ++c) classes.push_back(c);

  struct Job {
    std::size_t task;
    int held_class;
  };
  std::vector<Job> work;
  for (std::size_t t = 0; t < tasks.size(); ++t)
    for (int c : classes) work.push_back(Job{t, c});

  std::vector<ResultRow> rows(work.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    while (true) {
      const std::size_t j = next.fetch_add(1);
      if (j >= work.size()) return;
      try {
        const TaskSpec& task = tasks[work[j].task];
        std::vector<std::size_t> src;
        for (const auto& s : task.sources) src.push_back(corpus.view_index(s));
        const auto r =
            run_held_out(corpus, src, corpus.view_index(task.target), work[j].held_class, cfg);
        rows[j] = ResultRow{task.source_label(), task.target, r.held_class, r.accuracy, r.baseline};
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = work.size();
      }
    }
  };
  const int threads = std::max(1, std::min<int>(jobs, static_cast<int>(work.size())));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < threads; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);

  ResultsTable table;
  table.rows = std::move(rows);
  table.aggregate();
  return table;
}

std::string format_rows(const ResultsTable& table) {
  std::size_t ws = 6;
  std::size_t wt = 6;
  for (const auto& r : table.rows) {
    ws = std::max(ws, r.source.size());
    wt = std::max(wt, r.target.size());
  }
  std::ostringstream os;
  os << std::left << std::setw(int(ws)) << "source" << "  " << std::setw(int(wt)) << "target"
     << "  " << std::right << std::setw(10) << "held_class" << "  " << std::setw(8) << "acc(%)"
     << "  " << std::setw(8) << "base(%)" << '\n';
  auto line = [&](const std::string& s, const std::string& t, const std::string& c, double a,
                  double b) {
    os << std::left << std::setw(int(ws)) << s << "  " << std::setw(int(wt)) << t << "  "
       << std::right << std::setw(10) << c << "  " << std::setw(8) << format_percent(a) << "  "
       << std::setw(8) << format_percent(b) << '\n';
  };
  for (const auto& r : table.rows)
    line(r.source, r.target, std::to_string(r.held_class), r.accuracy, r.baseline);
  for (const auto& p : table.pairs) line(p.source, p.target, "mean", p.accuracy, p.baseline);
  line("ALL", "ALL", "mean", table.mean_accuracy, table.mean_baseline);
  return os.str();
}

std::string format_pairwise(const ResultsTable& table) {
  std::vector<std::string> views;
  auto add_view = [&](const std::string& v) {
    if (std::find(views.begin(), views.end(), v) == views.end()) views.push_back(v);
  };
  std::map<std::pair<std::string, std::string>, double> cell;
  std::vector<PairSummary> multi;
  for (const auto& p : table.pairs) {
    if (p.source.find('+') != std::string::npos) {
      multi.push_back(p);
      continue;
    }
    add_view(p.source);
    add_view(p.target);
    cell[{p.source, p.target}] = p.accuracy;
  }
  std::ostringstream os;
  if (!cell.empty()) {
    std::sort(views.begin(), views.end());
    std::size_t w = 8;
    for (const auto& v : views) w = std::max(w, v.size() + 2);
    os << std::left << std::setw(int(w)) << "src\\tgt";
    for (const auto& v : views) os << std::right << std::setw(int(w)) << v;
    os << std::setw(int(w)) << "Avg." << '\n';
    std::map<std::string, std::pair<double, int>> col_sum;
    for (const auto& s : views) {
      os << std::left << std::setw(int(w)) << s;
      double sum = 0.0;
      int n = 0;
      for (const auto& t : views) {
        auto it = cell.find({s, t});
        if (it == cell.end()) {
          os << std::right << std::setw(int(w)) << "-";
        } else {
          os << std::right << std::setw(int(w)) << format_percent(it->second);
          sum += it->second;
          ++n;
          col_sum[t].first += it->second;
          ++col_sum[t].second;
        }
      }
      os << std::right << std::setw(int(w)) << (n ? format_percent(sum / n) : "-") << '\n';
    }
    os << std::left << std::setw(int(w)) << "Avg.";
    double all = 0.0;
    int n_all = 0;
    for (const auto& t : views) {
      auto it = col_sum.find(t);
      if (it == col_sum.end()) {
        os << std::right << std::setw(int(w)) << "-";
      } else {
        os << std::right << std::setw(int(w)) << format_percent(it->second.first / it->second.second);
        all += it->second.first;
        n_all += it->second.second;
      }
    }
    os << std::right << std::setw(int(w)) << (n_all ? format_percent(all / n_all) : "-") << '\n';
  }
  if (!multi.empty()) {
    if (!cell.empty()) os << '\n';
    os << "target  accuracy(%)  sources\n";
    for (const auto& p : multi)
      os << std::left << std::setw(8) << p.target << std::right << std::setw(11)
         << format_percent(p.accuracy) << "  " << p.source << '\n';
  }
  return os.str();
}

}  // namespace jsrda
