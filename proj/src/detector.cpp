#include "nsd/detector.hpp"

#include <fstream>

#include <nlohmann/json.hpp>

#include "nsd/errors.hpp"

namespace nsd {

std::string_view to_string(L1Class c) { return kL1Labels[static_cast<std::size_t>(c)]; }

std::string_view to_string(SubClass s) {
  switch (s) {
    case SubClass::Mg:
      return "MG";
    case SubClass::Vc:
      return "VC";
    case SubClass::Ac:
      return "AC";
    case SubClass::Fd:
      return "FD";
    case SubClass::Vs:
      return "VS";
  }
  return "?";
}

std::optional<L1Class> parse_l1(std::string_view text) {
  for (std::size_t i = 0; i < kL1Labels.size(); ++i) {
    if (kL1Labels[i] == text) return static_cast<L1Class>(i);
  }
  return std::nullopt;
}

std::optional<SubClass> parse_sub(std::string_view text) {
  for (auto s : {SubClass::Mg, SubClass::Vc, SubClass::Ac, SubClass::Fd, SubClass::Vs}) {
    if (to_string(s) == text) return s;
  }
  return std::nullopt;
}

L1Class parent_of(SubClass s) {
  return (s == SubClass::Fd || s == SubClass::Vs) ? L1Class::Nrt : L1Class::Rt;
}

bool is_legal(L1Class l1, std::optional<SubClass> sub) { return !sub || parent_of(*sub) == l1; }

std::size_t sub_index(SubClass s) {
  switch (s) {
    case SubClass::Mg:
    case SubClass::Fd:
      return 0;
    case SubClass::Vc:
    case SubClass::Vs:
      return 1;
    case SubClass::Ac:
      return 2;
  }
  return 0;
}

SubClass rt_sub(std::size_t index) {
  static constexpr std::array<SubClass, 3> kRt = {SubClass::Mg, SubClass::Vc, SubClass::Ac};
  return kRt.at(index);
}

SubClass nrt_sub(std::size_t index) {
  static constexpr std::array<SubClass, 2> kNrt = {SubClass::Fd, SubClass::Vs};
  return kNrt.at(index);
}

namespace {

template <std::size_t N>
std::vector<std::string> as_strings(const std::array<std::string_view, N>& labels) {
  return {labels.begin(), labels.end()};
}

void check_order(const GbdtModel& m, const std::vector<std::string>& expected, const char* name) {
  if (m.class_labels != expected) throw ConfigError(std::string(name) + ": unexpected class order");
}

}  // namespace

std::vector<std::string> l1_class_order() { return as_strings(kL1Labels); }
std::vector<std::string> rt_class_order() { return as_strings(kRtLabels); }
std::vector<std::string> nrt_class_order() { return as_strings(kNrtLabels); }

void DetectorBundle::validate() const {
  check_order(l1, l1_class_order(), "l1");
  if (l2_rt) {
    check_order(*l2_rt, rt_class_order(), "l2rt");
    if (l2_rt->feature_count != l1.feature_count) throw ConfigError("l2rt: feature count differs from l1");
  }
  if (l2_nrt) {
    check_order(*l2_nrt, nrt_class_order(), "l2nrt");
    if (l2_nrt->feature_count != l1.feature_count) throw ConfigError("l2nrt: feature count differs from l1");
  }
}

DetectorBundle load_bundle(const std::filesystem::path& manifest) {
  std::ifstream in(manifest);
  if (!in) throw ConfigError("cannot open bundle manifest: " + manifest.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bundle manifest: ") + e.what());
  }
  const auto base = manifest.parent_path();
  auto load_entry = [&](const char* name, const std::vector<std::string>& expected) {
    if (!j.contains(name)) throw ConfigError(std::string("bundle manifest: missing '") + name + "'");
    const auto& entry = j.at(name);
    if (!entry.contains("path") || !entry.at("path").is_string()) {
      throw ConfigError(std::string("bundle manifest: '") + name + "' needs a path");
    }
    if (entry.contains("classes") && entry.at("classes").get<std::vector<std::string>>() != expected) {
      throw ConfigError(std::string("bundle manifest: '") + name + "' lists an unexpected class order");
    }
    std::filesystem::path p = entry.at("path").get<std::string>();
    if (p.is_relative()) p = base / p;
    return load_model(p.string());
  };
  DetectorBundle b;
  b.l1 = load_entry("l1", l1_class_order());
  b.l2_rt = load_entry("l2rt", rt_class_order());
  b.l2_nrt = load_entry("l2nrt", nrt_class_order());
  b.validate();
  return b;
}

void write_bundle_manifest(const std::filesystem::path& manifest, const std::string& l1_path,
                           const std::string& l2rt_path, const std::string& l2nrt_path) {
  nlohmann::ordered_json j;
  j["l1"] = {{"path", l1_path}, {"classes", l1_class_order()}};
  j["l2rt"] = {{"path", l2rt_path}, {"classes", rt_class_order()}};
  j["l2nrt"] = {{"path", l2nrt_path}, {"classes", nrt_class_order()}};
  std::ofstream out(manifest);
  if (!out) throw std::runtime_error("cannot write bundle manifest: " + manifest.string());
  out << j.dump(2) << '\n';
}

Detection detect(const DetectorBundle& bundle, std::span<const double> values) {
  Detection d;
  d.l1_proba = bundle.l1.predict_proba(values);
  d.l1 = static_cast<L1Class>(argmax(d.l1_proba));
  if (d.l1 == L1Class::Rt && bundle.l2_rt) {
    d.l2_proba = bundle.l2_rt->predict_proba(values);
    d.sub = rt_sub(argmax(d.l2_proba));
  } else if (d.l1 == L1Class::Nrt && bundle.l2_nrt) {
    d.l2_proba = bundle.l2_nrt->predict_proba(values);
    d.sub = nrt_sub(argmax(d.l2_proba));
  }
  return d;
}

Detection detect(const DetectorBundle& bundle, const InputVector& v) { return detect(bundle, v.values); }

MultiLabelOutput step_output(const CategoryMap& cmap) {
  MultiLabelOutput out;
  for (const auto& [key, d] : cmap) {
    switch (d.l1) {
      case L1Class::Cg:
        out.cg = true;
        break;
      case L1Class::Rt:
        out.rt = true;
        break;
      case L1Class::Nrt:
        out.nrt = true;
        break;
    }
  }
  return out;
}

}  // namespace nsd
