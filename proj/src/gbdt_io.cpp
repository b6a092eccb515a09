#include <cmath>
#include <fstream>
#include <sstream>

#include "nsd/errors.hpp"
#include "nsd/gbdt.hpp"

namespace nsd {

void to_json(nlohmann::json& j, const TrainParams& p) {
  j = nlohmann::json{{"n_rounds", p.n_rounds},
                     {"max_depth", p.max_depth},
                     {"learning_rate", p.learning_rate},
                     {"min_child_weight", p.min_child_weight},
                     {"lambda_l2", p.lambda_l2},
                     {"gamma_min_gain", p.gamma_min_gain},
                     {"subsample", p.subsample},
                     {"seed", p.seed}};
}

void from_json(const nlohmann::json& j, TrainParams& p) {
  p.n_rounds = j.value("n_rounds", p.n_rounds);
  p.max_depth = j.value("max_depth", p.max_depth);
  p.learning_rate = j.value("learning_rate", p.learning_rate);
  p.min_child_weight = j.value("min_child_weight", p.min_child_weight);
  p.lambda_l2 = j.value("lambda_l2", p.lambda_l2);
  p.gamma_min_gain = j.value("gamma_min_gain", p.gamma_min_gain);
  p.subsample = j.value("subsample", p.subsample);
  p.seed = j.value("seed", p.seed);
}

namespace {

using ojson = nlohmann::ordered_json;

ojson node_to_json(const Tree& tree, std::size_t i) {
  const TreeNode& n = tree.nodes[i];
  ojson j;
  if (n.is_leaf()) {
    j["leaf"] = n.leaf;
    return j;
  }
  j["feat"] = n.feature;
  j["thr"] = n.threshold;
  j["gain"] = n.gain;
  j["left"] = node_to_json(tree, static_cast<std::size_t>(n.left));
  j["right"] = node_to_json(tree, static_cast<std::size_t>(n.right));
  return j;
}

double finite_number(const nlohmann::json& j, const char* what) {
  if (!j.is_number()) throw ConfigError(std::string("model: '") + what + "' must be a number");
  double v = j.get<double>();
  if (!std::isfinite(v)) throw ConfigError(std::string("model: '") + what + "' is not finite");
  return v;
}

// Appends the subtree in preorder and returns its root id.
int node_from_json(const nlohmann::json& j, Tree& tree, std::size_t feature_count, int depth) {
  if (depth > 64) throw ConfigError("model: tree nesting too deep");
  if (!j.is_object()) throw ConfigError("model: tree node must be an object");
  int id = static_cast<int>(tree.nodes.size());
  tree.nodes.emplace_back();
  if (j.contains("leaf")) {
    tree.nodes[static_cast<std::size_t>(id)].leaf = finite_number(j.at("leaf"), "leaf");
    return id;
  }
  if (!j.contains("feat") || !j.contains("thr") || !j.contains("left") || !j.contains("right")) {
    throw ConfigError("model: internal node needs feat, thr, left and right");
  }
  const auto& feat = j.at("feat");
  if (!feat.is_number_integer() || feat.get<long long>() < 0 ||
      static_cast<std::size_t>(feat.get<long long>()) >= feature_count) {
    throw ConfigError("model: feature index out of range");
  }
  TreeNode n;
  n.feature = feat.get<int>();
  n.threshold = finite_number(j.at("thr"), "thr");
  n.gain = j.contains("gain") ? finite_number(j.at("gain"), "gain") : 0.0;
  n.left = node_from_json(j.at("left"), tree, feature_count, depth + 1);
  n.right = node_from_json(j.at("right"), tree, feature_count, depth + 1);
  tree.nodes[static_cast<std::size_t>(id)] = n;
  return id;
}

// Level-order renumbering, so a reloaded tree equals the trained one node for
// node (the grower allocates children level by level).
Tree to_level_order(const Tree& preorder) {
  Tree out;
  if (preorder.nodes.empty()) return out;
  std::vector<std::size_t> queue{0};
  std::vector<int> new_id(preorder.nodes.size(), -1);
  for (std::size_t head = 0; head < queue.size(); ++head) {
    const TreeNode& n = preorder.nodes[queue[head]];
    new_id[queue[head]] = static_cast<int>(head);
    if (!n.is_leaf()) {
      queue.push_back(static_cast<std::size_t>(n.left));
      queue.push_back(static_cast<std::size_t>(n.right));
    }
  }
  for (std::size_t old : queue) {
    TreeNode n = preorder.nodes[old];
    if (!n.is_leaf()) {
      n.left = new_id[static_cast<std::size_t>(n.left)];
      n.right = new_id[static_cast<std::size_t>(n.right)];
    }
    out.nodes.push_back(n);
  }
  return out;
}

}  // namespace

nlohmann::ordered_json model_to_json(const GbdtModel& model) {
  ojson j;
  j["n_classes"] = model.n_classes;
  j["class_labels"] = model.class_labels;
  j["learning_rate"] = model.learning_rate;
  j["base_score"] = model.base_score;
  j["feature_count"] = model.feature_count;
  ojson rounds = ojson::array();
  for (const auto& round : model.rounds) {
    ojson trees = ojson::array();
    for (const auto& tree : round) trees.push_back(node_to_json(tree, 0));
    rounds.push_back(std::move(trees));
  }
  j["rounds"] = std::move(rounds);
  j["train_log_loss"] = model.train_log_loss;
  return j;
}

GbdtModel model_from_json(const nlohmann::json& j) {
  try {
    GbdtModel m;
    m.n_classes = j.at("n_classes").get<int>();
    m.class_labels = j.at("class_labels").get<std::vector<std::string>>();
    m.learning_rate = finite_number(j.at("learning_rate"), "learning_rate");
    m.base_score = finite_number(j.at("base_score"), "base_score");
    m.feature_count = j.at("feature_count").get<std::size_t>();
    if (m.n_classes < 2) throw ConfigError("model: n_classes must be >= 2");
    if (m.class_labels.size() != static_cast<std::size_t>(m.n_classes)) {
      throw ConfigError("model: class_labels length differs from n_classes");
    }
    if (m.feature_count == 0) throw ConfigError("model: feature_count must be positive");
    for (const auto& round : j.at("rounds")) {
      if (!round.is_array() || round.size() != static_cast<std::size_t>(m.n_classes)) {
        throw ConfigError("model: every round needs exactly n_classes trees");
      }
      std::vector<Tree> trees;
      for (const auto& node : round) {
        Tree preorder;
        node_from_json(node, preorder, m.feature_count, 0);
        trees.push_back(to_level_order(preorder));
      }
      m.rounds.push_back(std::move(trees));
    }
    if (j.contains("train_log_loss")) m.train_log_loss = j.at("train_log_loss").get<std::vector<double>>();
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("model: ") + e.what());
  }
}

std::string serialize_model(const GbdtModel& model) { return model_to_json(model).dump() + "\n"; }

GbdtModel deserialize_model(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("model: ") + e.what());
  }
  return model_from_json(j);
}

void save_model(const GbdtModel& model, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write model: " + path);
  out << serialize_model(model);
}

GbdtModel load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open model: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return deserialize_model(buf.str());
}

}  // namespace nsd
