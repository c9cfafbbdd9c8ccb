#pragma once

#include <array>
#include <cstdint>
#include <string_view>
#include <type_traits>
#include <utility>
#include <variant>
#include <vector>

#include "tracemin/common.hpp"
#include "tracemin/graph.hpp"

namespace tracemin {

// Payloads carried over one directed link in one synchronous step.
struct SelfWeightPayload {  // p = 2: w_ii
  double value;
};
struct LinkWeightsPayload {  // p = 4 step 1: the sender's incident link weights
  std::vector<std::pair<NodeId, double>> entries;
};
struct CubeDiagonalPayload {  // p = 4 step 2: (W^3)_ii
  double value;
};
struct RelayPayload {  // general even p: weight rows flooded towards p/2 hops
  std::size_t rows = 0;
  std::size_t scalars = 0;
};
struct EstimatePayload {  // averaging step: x_i(k)
  double value;
};
struct DegreePayload {  // initialization: degree or running max degree
  double value;
};
struct DetectionBundlePayload {  // {x_j(k), X_j(k-1), W_j^(k-1)}
  double estimate;
  std::vector<double> neighbor_estimates;
  std::vector<double> link_weights;
};

using Payload = std::variant<SelfWeightPayload, LinkWeightsPayload, CubeDiagonalPayload, RelayPayload,
                             EstimatePayload, DetectionBundlePayload, DegreePayload>;

enum class MessageKind : std::uint8_t { SelfWeight, LinkWeights, CubeDiagonal, Relay, Estimate, Bundle, Degree };
inline constexpr std::size_t kMessageKindCount = 7;

inline std::string_view to_string(MessageKind k) {
  switch (k) {
    case MessageKind::SelfWeight: return "self_weight";
    case MessageKind::LinkWeights: return "link_weights";
    case MessageKind::CubeDiagonal: return "cube_diagonal";
    case MessageKind::Relay: return "relay";
    case MessageKind::Estimate: return "estimate";
    case MessageKind::Bundle: return "bundle";
    case MessageKind::Degree: return "degree";
  }
  return "?";
}

inline MessageKind kind_of(const Payload& p) { return static_cast<MessageKind>(p.index()); }

/// Number of real values a payload carries.
inline std::size_t payload_size(const Payload& p) {
  return std::visit(
      [](const auto& v) -> std::size_t {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, LinkWeightsPayload>) return v.entries.size();
        else if constexpr (std::is_same_v<T, RelayPayload>) return v.scalars;
        else if constexpr (std::is_same_v<T, DetectionBundlePayload>)
          return 1 + v.neighbor_estimates.size() + v.link_weights.size();
        else return 1;
      },
      p);
}

struct RoundMessage {
  NodeId sender;
  NodeId receiver;
  Payload payload;
};

/// Message accounting: one entry is one payload over one directed link.
/// Directed link index: 2*l for (u -> v) with u < v, 2*l + 1 for (v -> u).
class MessageLog {
 public:
  MessageLog() = default;
  explicit MessageLog(const Graph& g) : per_link_(2 * g.edge_count(), 0), graph_(&g) {}

  void record(NodeId sender, NodeId receiver, MessageKind kind, std::size_t scalars) {
    auto l = graph_->find_edge(sender, receiver);
    if (!l) throw ProtocolFault("message sent over a non-existent link");
    per_link_[2 * *l + (sender < receiver ? 0 : 1)] += 1;
    per_kind_[static_cast<std::size_t>(kind)] += 1;
    scalars_ += scalars;
    ++total_;
  }
  void record(const RoundMessage& msg) {
    record(msg.sender, msg.receiver, kind_of(msg.payload), payload_size(msg.payload));
  }

  void merge(const MessageLog& other) {
    if (per_link_.empty()) {
      *this = other;
      return;
    }
    require(per_link_.size() == other.per_link_.size(), "MessageLog::merge: graph mismatch");
    for (std::size_t i = 0; i < per_link_.size(); ++i) per_link_[i] += other.per_link_[i];
    for (std::size_t k = 0; k < kMessageKindCount; ++k) per_kind_[k] += other.per_kind_[k];
    scalars_ += other.scalars_;
    total_ += other.total_;
  }

  std::uint64_t total_messages() const { return total_; }
  std::uint64_t total_scalars() const { return scalars_; }
  std::uint64_t count(MessageKind k) const { return per_kind_[static_cast<std::size_t>(k)]; }
  std::uint64_t directed_count(EdgeId l, bool forward) const { return per_link_.at(2 * l + (forward ? 0 : 1)); }
  const std::vector<std::uint64_t>& per_directed_link() const { return per_link_; }

  /// Messages per undirected link (both directions counted).
  double per_link_average() const {
    return per_link_.empty() ? 0.0 : static_cast<double>(total_) / (per_link_.size() / 2.0);
  }

 private:
  std::vector<std::uint64_t> per_link_;
  std::array<std::uint64_t, kMessageKindCount> per_kind_{};
  std::uint64_t scalars_ = 0;
  std::uint64_t total_ = 0;
  const Graph* graph_ = nullptr;
};

/// Messages one optimizer round costs: 2m for p = 2, 4m for p = 4 and
/// p/2 flooding steps (2m each) for the relay used at larger p.
inline std::uint64_t messages_per_round(const Graph& g, int p) {
  const std::uint64_t m = g.edge_count();
  if (p == 2) return 2 * m;
  if (p == 4) return 4 * m;
  return 2 * m * static_cast<std::uint64_t>(p / 2);
}

}  // namespace tracemin
