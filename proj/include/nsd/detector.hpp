#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "nsd/gbdt.hpp"
#include "nsd/input_management.hpp"

namespace nsd {

/// Coarse service classes, ordered from most to least latency sensitive.
/// CG needs < 50 ms, RT tolerates 50-200 ms, NRT prefers < 500 ms.
enum class L1Class : std::uint8_t { Cg = 0, Rt = 1, Nrt = 2 };

/// Sub-classes: MG/VC/AC under RT, FD/VS under NRT. CG has none.
enum class SubClass : std::uint8_t { Mg, Vc, Ac, Fd, Vs };

inline constexpr std::array<std::string_view, 3> kL1Labels = {"CG", "RT", "NRT"};
inline constexpr std::array<std::string_view, 3> kRtLabels = {"MG", "VC", "AC"};
inline constexpr std::array<std::string_view, 2> kNrtLabels = {"FD", "VS"};

std::string_view to_string(L1Class c);
std::string_view to_string(SubClass s);
std::optional<L1Class> parse_l1(std::string_view text);
std::optional<SubClass> parse_sub(std::string_view text);

/// Parent of a sub-class.
L1Class parent_of(SubClass s);
/// True when `sub` may appear under `l1` (none is legal everywhere).
bool is_legal(L1Class l1, std::optional<SubClass> sub);

/// Index of a sub-class within its parent's model (MG=0, VC=1, AC=2, FD=0, VS=1).
std::size_t sub_index(SubClass s);
SubClass rt_sub(std::size_t index);
SubClass nrt_sub(std::size_t index);

std::vector<std::string> l1_class_order();
std::vector<std::string> rt_class_order();
std::vector<std::string> nrt_class_order();

/// The three classifiers. L2 models may be absent, which disables
/// sub-classification (used for ablation).
struct DetectorBundle {
  GbdtModel l1;
  std::optional<GbdtModel> l2_rt;
  std::optional<GbdtModel> l2_nrt;

  /// Throws ConfigError unless class orders are [CG,RT,NRT], [MG,VC,AC],
  /// [FD,VS] and all models share one feature count.
  void validate() const;
  std::size_t feature_count() const noexcept { return l1.feature_count; }
};

/// Bundle manifest: {"l1": {"path": ..., "classes": [...]}, "l2rt": ...,
/// "l2nrt": ...}. Paths are relative to the manifest. Throws ConfigError.
DetectorBundle load_bundle(const std::filesystem::path& manifest);
void write_bundle_manifest(const std::filesystem::path& manifest, const std::string& l1_path,
                           const std::string& l2rt_path, const std::string& l2nrt_path);

struct Detection {
  L1Class l1 = L1Class::Cg;
  std::optional<SubClass> sub;
  std::vector<double> l1_proba;
  std::vector<double> l2_proba;  // empty when no L2 model ran

  bool operator==(const Detection&) const = default;
};

/// L1 decides the coarse class; RT goes to the RT sub-model, NRT to the NRT
/// sub-model, CG stops.
Detection detect(const DetectorBundle& bundle, std::span<const double> values);
Detection detect(const DetectorBundle& bundle, const InputVector& v);

using CategoryMap = std::map<ConversationKey, Detection>;

/// Stream-level flags in fixed order [CG, RT, NRT].
struct MultiLabelOutput {
  bool cg = false;
  bool rt = false;
  bool nrt = false;

  bool operator==(const MultiLabelOutput&) const = default;
  std::array<bool, 3> as_array() const { return {cg, rt, nrt}; }
};

MultiLabelOutput step_output(const CategoryMap& cmap);

}  // namespace nsd
