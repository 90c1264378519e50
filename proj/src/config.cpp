#include "jsrda/config.hpp"

#include "jsrda/error.hpp"

#include <fstream>
#include <set>

namespace jsrda {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const char* kModule = "config";

void reject_unknown(const json& obj, const std::set<std::string>& known, const std::string& where) {
  if (!obj.is_object()) throw Error(kModule, "'" + where + "' must be a JSON object");
  for (const auto& item : obj.items()) {
    if (!known.count(item.key()))
      throw Error(kModule, "unknown field '" + item.key() + "' in " + where);
  }
}

template <typename T>
void read_field(const json& obj, const char* key, T& out, const std::string& where) {
  if (!obj.contains(key)) return;
  try {
    out = obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw Error(kModule, "field '" + std::string(key) + "' in " + where + " has the wrong type");
  }
}

std::string mode_name(TaskMode mode) {
  switch (mode) {
    case TaskMode::CrossView: return "cross_view";
    case TaskMode::MultiView: return "multi_view";
    case TaskMode::Explicit: return "explicit";
  }
  return "cross_view";
}

TaskMode parse_mode(const std::string& s) {
  if (s == "cross_view") return TaskMode::CrossView;
  if (s == "multi_view") return TaskMode::MultiView;
  if (s == "explicit") return TaskMode::Explicit;
  throw Error(kModule, "unknown mode '" + s + "' (expected cross_view, multi_view or explicit)");
}

}  // namespace

std::string TaskSpec::source_label() const {
  std::string out;
  for (const auto& s : sources) {
    if (!out.empty()) out += '+';
    out += s;
  }
  return out;
}

void ExperimentConfig::validate() const {
  if (manifest.has_value() == synth.has_value())
    throw Error(kModule, "corpus must name exactly one of 'manifest' or 'synth'");
  if (synth) synth->validate();
  affinity.validate();
  msda.validate();
  dict.validate();
  adapt.validate();
  if (mode == TaskMode::Explicit && tasks.empty())
    throw Error(kModule, "mode 'explicit' needs at least one task");
  for (const auto& t : tasks) {
    if (t.sources.empty()) throw Error(kModule, "task with no source views");
    for (const auto& s : t.sources) {
      if (s == t.target)
        throw Error(kModule, "view '" + s + "' is both a source and the target");
    }
  }
}

void ExperimentConfig::apply_seed(std::uint64_t root) {
  seed = root;
  dict.seed = root;
  if (synth) synth->seed = root;
}

json to_json(const SynthConfig& cfg) {
  return json{{"seed", cfg.seed},
              {"views", cfg.views},
              {"classes", cfg.classes},
              {"samples_per_class", cfg.samples_per_class},
              {"latent_dim", cfg.latent_dim},
              {"view_noise", cfg.view_noise},
              {"observation_dim", cfg.observation_dim},
              {"class_separation", cfg.class_separation},
              {"shared_transform", cfg.shared_transform}};
}

SynthConfig synth_from_json(const json& doc) {
  const std::string where = "synth config";
  reject_unknown(doc,
                 {"seed", "views", "classes", "samples_per_class", "latent_dim", "view_noise",
                  "observation_dim", "class_separation", "shared_transform"},
                 where);
  SynthConfig cfg;
  read_field(doc, "seed", cfg.seed, where);
  read_field(doc, "views", cfg.views, where);
  read_field(doc, "classes", cfg.classes, where);
  read_field(doc, "samples_per_class", cfg.samples_per_class, where);
  read_field(doc, "latent_dim", cfg.latent_dim, where);
  read_field(doc, "view_noise", cfg.view_noise, where);
  read_field(doc, "observation_dim", cfg.observation_dim, where);
  read_field(doc, "class_separation", cfg.class_separation, where);
  read_field(doc, "shared_transform", cfg.shared_transform, where);
  cfg.validate();
  return cfg;
}

json to_json(const ExperimentConfig& cfg) {
  json doc;
  doc["seed"] = cfg.seed;
  if (cfg.manifest) {
    doc["corpus"] = {{"manifest", cfg.manifest->string()}};
  } else if (cfg.synth) {
    doc["corpus"] = {{"synth", to_json(*cfg.synth)}};
  }
  doc["mode"] = mode_name(cfg.mode);
  doc["tasks"] = json::array();
  for (const auto& t : cfg.tasks) doc["tasks"].push_back({{"sources", t.sources}, {"target", t.target}});
  doc["held_classes"] = cfg.held_classes;
  doc["affinity"] = {{"c", cfg.affinity.bandwidth}};
  doc["msda"] = {{"noise_prob", cfg.msda.noise_prob},
                 {"layers", cfg.msda.layers},
                 {"ridge", cfg.msda.ridge}};
  doc["dictionary"] = {{"atoms", cfg.dict.atoms},
                       {"sparsity", cfg.dict.sparsity},
                       {"ksvd_iters", cfg.dict.ksvd_iters},
                       {"omp_tol", cfg.dict.omp_tol}};
  json adapt = {{"lambda", cfg.adapt.lambda},
                {"mu", cfg.adapt.mu},
                {"beta", cfg.adapt.beta},
                {"k", cfg.adapt.subspace_dim},
                {"iterations", cfg.adapt.iterations},
                {"kernel", to_string(cfg.adapt.kernel)},
                {"eig_order", to_string(cfg.adapt.eig_order)}};
  if (cfg.adapt.rbf_bandwidth) {
    adapt["rbf_bandwidth"] = *cfg.adapt.rbf_bandwidth;
  } else {
    adapt["rbf_bandwidth"] = "median";
  }
  doc["adapt"] = adapt;
  doc["output"] = cfg.output.string();
  return doc;
}

ExperimentConfig experiment_from_json(const json& doc, const fs::path& base_dir) {
  reject_unknown(doc,
                 {"seed", "corpus", "mode", "tasks", "held_classes", "affinity", "msda",
                  "dictionary", "adapt", "output"},
                 "experiment config");
  ExperimentConfig cfg;
  read_field(doc, "seed", cfg.seed, "experiment config");

  if (!doc.contains("corpus")) throw Error(kModule, "missing field 'corpus'");
  const json& corpus = doc.at("corpus");
  reject_unknown(corpus, {"manifest", "synth"}, "corpus");
  if (corpus.contains("manifest")) {
    fs::path m = corpus.at("manifest").get<std::string>();
    cfg.manifest = m.is_absolute() ? m : fs::absolute(base_dir / m).lexically_normal();
  }
  if (corpus.contains("synth")) {
    cfg.synth = synth_from_json(corpus.at("synth"));
    if (!doc.contains("seed")) cfg.seed = cfg.synth->seed;
  }

  if (doc.contains("mode")) cfg.mode = parse_mode(doc.at("mode").get<std::string>());
  if (doc.contains("tasks")) {
    for (const auto& t : doc.at("tasks")) {
      reject_unknown(t, {"sources", "target"}, "task");
      TaskSpec spec;
      read_field(t, "sources", spec.sources, "task");
      read_field(t, "target", spec.target, "task");
      cfg.tasks.push_back(std::move(spec));
    }
    if (!doc.contains("mode")) cfg.mode = TaskMode::Explicit;
  }
  read_field(doc, "held_classes", cfg.held_classes, "experiment config");

  if (doc.contains("affinity")) {
    const json& a = doc.at("affinity");
    reject_unknown(a, {"c"}, "affinity");
    read_field(a, "c", cfg.affinity.bandwidth, "affinity");
  }
  if (doc.contains("msda")) {
    const json& m = doc.at("msda");
    reject_unknown(m, {"noise_prob", "layers", "ridge"}, "msda");
    read_field(m, "noise_prob", cfg.msda.noise_prob, "msda");
    read_field(m, "layers", cfg.msda.layers, "msda");
    read_field(m, "ridge", cfg.msda.ridge, "msda");
  }
  if (doc.contains("dictionary")) {
    const json& d = doc.at("dictionary");
    reject_unknown(d, {"atoms", "sparsity", "ksvd_iters", "omp_tol"}, "dictionary");
    read_field(d, "atoms", cfg.dict.atoms, "dictionary");
    read_field(d, "sparsity", cfg.dict.sparsity, "dictionary");
    read_field(d, "ksvd_iters", cfg.dict.ksvd_iters, "dictionary");
    read_field(d, "omp_tol", cfg.dict.omp_tol, "dictionary");
  }
  if (doc.contains("adapt")) {
    const json& a = doc.at("adapt");
    reject_unknown(a,
                   {"lambda", "mu", "beta", "k", "iterations", "kernel", "rbf_bandwidth",
                    "eig_order"},
                   "adapt");
    read_field(a, "lambda", cfg.adapt.lambda, "adapt");
    read_field(a, "mu", cfg.adapt.mu, "adapt");
    read_field(a, "beta", cfg.adapt.beta, "adapt");
    read_field(a, "k", cfg.adapt.subspace_dim, "adapt");
    read_field(a, "iterations", cfg.adapt.iterations, "adapt");
    if (a.contains("kernel")) cfg.adapt.kernel = parse_kernel_kind(a.at("kernel").get<std::string>());
    if (a.contains("eig_order"))
      cfg.adapt.eig_order = parse_eig_order(a.at("eig_order").get<std::string>());
    if (a.contains("rbf_bandwidth")) {
      const json& bw = a.at("rbf_bandwidth");
      if (bw.is_string()) {
        if (bw.get<std::string>() != "median")
          throw Error(kModule, "rbf_bandwidth must be \"median\" or a positive number");
        cfg.adapt.rbf_bandwidth.reset();
      } else {
        cfg.adapt.rbf_bandwidth = bw.get<double>();
      }
    }
  }
  if (doc.contains("output")) cfg.output = doc.at("output").get<std::string>();
  cfg.apply_seed(cfg.seed);
  cfg.validate();
  return cfg;
}

json read_json_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(kModule, "cannot open config file: " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw Error(kModule, "malformed JSON in " + path.string() + ": " + e.what());
  }
}

}  // namespace jsrda
