#pragma once
// Inter-conversation skip-probability estimators.
//
// All estimators are pure functions of a history snapshot, the current
// conversation's assumptions and an EstimatorConfig. History is indexed
// newest-first. Exponential weights are computed relative to the minimum
// distance, which leaves every ratio unchanged and avoids underflow for
// large kernel coefficients.

#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "slotforge/core_model.hpp"

namespace slotforge {

struct HistoryView {
    std::vector<ConversationRecord> records;  // records[0] is the newest

    bool empty() const noexcept { return records.empty(); }
    std::size_t size() const noexcept { return records.size(); }
    std::vector<bool> skip_column(EntityType t) const;
};

// Newest-first view over the slot queues of a conversation state.
HistoryView history_view(const ConversationState& state);

struct CurrentAssumptions {
    AssumptionArray assumed{};
    // Current extracted values, used only by the value-aware distance.
    std::array<std::vector<std::string>, kNumEntityTypes> values{};

    bool contains(EntityType t) const { return assumed[slot_index(t)].has_value(); }
    std::size_t count() const noexcept;
    // Unassumed types in ascending index order.
    std::vector<EntityType> unassumed() const;
};

CurrentAssumptions assumptions_of(const ConversationState& state);

enum class SkipModel { IntraType, NN, WeightedNN, OrderNN, OrderAskedNN, OrderClassifier, ValueAware };

std::string_view to_string(SkipModel model) noexcept;
std::optional<SkipModel> skip_model_from_string(std::string_view name);

struct SkipEstimate {
    double p_hat = 0.0;
    SkipModel model = SkipModel::IntraType;
};

class EmptyHistoryError : public std::domain_error {
public:
    EmptyHistoryError() : std::domain_error("skip estimator needs at least one past conversation") {}
};

// Ratio of skips; with `padded`, missing conversations up to K count as initial_bias.
// An empty history without padding returns initial_bias.
SkipEstimate intra_type(const std::vector<bool>& skips, std::size_t K, double initial_bias, bool padded);

int hamming_distance(const ConversationRecord& record, const CurrentAssumptions& assumptions);

// Fraction of skipped-i records among the minimum-distance set.
SkipEstimate nn_estimate(EntityType i, const HistoryView& history, const CurrentAssumptions& assumptions);

// exp(-alpha * D) weighted fraction.
SkipEstimate weighted_nn_estimate(EntityType i, const HistoryView& history,
                                  const CurrentAssumptions& assumptions, double weight_alpha);

struct AskedTerm {
    EntityType type;
    double gamma;
    int asked_order;  // #I' when the bot asks about `type` now
};

// Hamming distance plus beta * sum of order differences over I' (and the
// gamma term for the asked type when present).
double order_distance(const ConversationRecord& record, const CurrentAssumptions& assumptions, double beta,
                      const std::optional<AskedTerm>& asked = std::nullopt);

SkipEstimate order_nn_estimate(EntityType i, const HistoryView& history, const CurrentAssumptions& assumptions,
                               const EstimatorConfig& config, bool asked);

using OrderVector = std::vector<int>;

// Every order vector of M remaining types reachable by a sequence
// of inputs each assuming a non-empty subset, offset by assumed_count. Sorted
// lexicographically. M = 0 yields the single empty vector.
std::vector<OrderVector> orders_set(int M, int assumed_count);

struct WeightedOrder {
    OrderVector order;
    double weight = 0.0;
};

// Normalized weights aligned with `order_set`. Candidate vectors
// hold orders of assumptions.unassumed() in that sequence. Empty history gives
// uniform weights.
std::vector<WeightedOrder> estimated_orders_weights(std::span<const OrderVector> order_set,
                                                    const HistoryView& history,
                                                    const CurrentAssumptions& assumptions, double beta,
                                                    double delta);

// Weighted-NN estimate with the full order vector imputed: unassumed types take
// their order from `imputed` (aligned with assumptions.unassumed()).
SkipEstimate imputed_order_estimate(EntityType i, const HistoryView& history,
                                    const CurrentAssumptions& assumptions, const OrderVector& imputed,
                                    const EstimatorConfig& config);

// Mixture of imputed-order estimates over orders_set, weighted by estimated_orders_weights.
// With top_only, averages the estimates of orders within 1e-12 of the top weight.
SkipEstimate classifier_estimate(EntityType i, const HistoryView& history, const CurrentAssumptions& assumptions,
                                 const EstimatorConfig& config, bool top_only);

// Jaccard distance of two value sets (0 when equal, 1 when disjoint).
double value_binary_distance(std::span<const std::string> a, std::span<const std::string> b);

// Weighted NN with an added value_weight * value-distance term over I'.
SkipEstimate value_aware_estimate(EntityType i, const HistoryView& history, const CurrentAssumptions& assumptions,
                                  const EstimatorConfig& config);

// b = -alpha (p - 0.5) or -alpha (p - 0.5)^3; `invert` flips the sign.
double probability_to_bias(double p_hat, double bias_alpha, bool cubed, bool invert = false);

// Dispatches on `model`. Empty history falls back to the padded intra-type prior.
SkipEstimate estimate_skip(SkipModel model, EntityType i, const HistoryView& history,
                           const CurrentAssumptions& assumptions, const EstimatorConfig& config);

}  // namespace slotforge
