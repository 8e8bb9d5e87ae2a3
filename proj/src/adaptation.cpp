#include "slotforge/adaptation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <numeric>
#include <set>

namespace slotforge {

namespace {

// Weighted skip fraction with weights exp(-coef * (d - min d)).
double kernel_fraction(EntityType i, const HistoryView& history, std::span<const double> distances,
                       double coef) {
    const double dmin = *std::min_element(distances.begin(), distances.end());
    double skipped = 0.0;
    double total = 0.0;
    for (std::size_t j = 0; j < history.size(); ++j) {
        const double w = std::exp(-coef * (distances[j] - dmin));
        total += w;
        if (history.records[j].skips[slot_index(i)]) skipped += w;
    }
    return skipped / total;
}

void require_history(const HistoryView& history) {
    if (history.empty()) throw EmptyHistoryError();
}

}  // namespace

std::vector<bool> HistoryView::skip_column(EntityType t) const {
    std::vector<bool> column;
    column.reserve(records.size());
    for (const auto& r : records) column.push_back(r.skips[slot_index(t)]);
    return column;
}

HistoryView history_view(const ConversationState& state) {
    HistoryView view;
    const auto& first = state.slot(EntityType::AudienceAge);
    const std::size_t n = first.skip_history.size();
    view.records.resize(n);
    for (std::size_t j = 0; j < n; ++j) {
        auto& rec = view.records[j];
        for (auto t : kAllEntityTypes) {
            const auto& slot = state.slot(t);
            rec.skips[slot_index(t)] = slot.skip_history.newest(j);
            rec.orders[slot_index(t)] = slot.order_history.newest(j);
            if (j < slot.value_history.size()) rec.values[slot_index(t)] = slot.value_history.newest(j);
        }
    }
    return view;
}

std::size_t CurrentAssumptions::count() const noexcept {
    return static_cast<std::size_t>(
        std::count_if(assumed.begin(), assumed.end(), [](const auto& a) { return a.has_value(); }));
}

std::vector<EntityType> CurrentAssumptions::unassumed() const {
    std::vector<EntityType> out;
    for (auto t : kAllEntityTypes) {
        if (!contains(t)) out.push_back(t);
    }
    return out;
}

CurrentAssumptions assumptions_of(const ConversationState& state) {
    CurrentAssumptions current;
    current.assumed = state.assumptions();
    for (auto t : kAllEntityTypes) current.values[slot_index(t)] = state.slot(t).value_keys();
    return current;
}

std::string_view to_string(SkipModel model) noexcept {
    switch (model) {
        case SkipModel::IntraType: return "intra_type";
        case SkipModel::NN: return "nn";
        case SkipModel::WeightedNN: return "weighted_nn";
        case SkipModel::OrderNN: return "order_nn";
        case SkipModel::OrderAskedNN: return "order_asked_nn";
        case SkipModel::OrderClassifier: return "order_classifier";
        case SkipModel::ValueAware: return "value_aware";
    }
    return "intra_type";
}

std::optional<SkipModel> skip_model_from_string(std::string_view name) {
    for (auto m : {SkipModel::IntraType, SkipModel::NN, SkipModel::WeightedNN, SkipModel::OrderNN,
                   SkipModel::OrderAskedNN, SkipModel::OrderClassifier, SkipModel::ValueAware}) {
        if (to_string(m) == name) return m;
    }
    return std::nullopt;
}

SkipEstimate intra_type(const std::vector<bool>& skips, std::size_t K, double initial_bias, bool padded) {
    if (skips.size() > K) throw std::invalid_argument("intra_type: history longer than K");
    const auto n_skips = static_cast<double>(std::count(skips.begin(), skips.end(), true));
    const auto registered = static_cast<double>(skips.size());
    double p = initial_bias;
    if (padded) {
        p = (n_skips + initial_bias * (static_cast<double>(K) - registered)) / static_cast<double>(K);
    } else if (!skips.empty()) {
        p = n_skips / registered;
    }
    return {p, SkipModel::IntraType};
}

int hamming_distance(const ConversationRecord& record, const CurrentAssumptions& assumptions) {
    int d = 0;
    for (std::size_t k = 0; k < kNumEntityTypes; ++k) {
        const auto& a = assumptions.assumed[k];
        if (a && record.skips[k] != a->skipped) ++d;
    }
    return d;
}

SkipEstimate nn_estimate(EntityType i, const HistoryView& history, const CurrentAssumptions& assumptions) {
    require_history(history);
    int best = std::numeric_limits<int>::max();
    for (const auto& r : history.records) best = std::min(best, hamming_distance(r, assumptions));
    int members = 0;
    int skipped = 0;
    for (const auto& r : history.records) {
        if (hamming_distance(r, assumptions) != best) continue;
        ++members;
        if (r.skips[slot_index(i)]) ++skipped;
    }
    return {static_cast<double>(skipped) / static_cast<double>(members), SkipModel::NN};
}

SkipEstimate weighted_nn_estimate(EntityType i, const HistoryView& history,
                                  const CurrentAssumptions& assumptions, double weight_alpha) {
    require_history(history);
    if (!(weight_alpha > 0.0)) throw std::invalid_argument("weight_alpha must be > 0");
    std::vector<double> d;
    d.reserve(history.size());
    for (const auto& r : history.records) d.push_back(hamming_distance(r, assumptions));
    return {kernel_fraction(i, history, d, weight_alpha), SkipModel::WeightedNN};
}

double order_distance(const ConversationRecord& record, const CurrentAssumptions& assumptions, double beta,
                      const std::optional<AskedTerm>& asked) {
    double order_sum = 0.0;
    for (std::size_t k = 0; k < kNumEntityTypes; ++k) {
        const auto& a = assumptions.assumed[k];
        if (a) order_sum += std::abs(record.orders[k] - a->order);
    }
    double d = hamming_distance(record, assumptions) + beta * order_sum;
    if (asked) d += asked->gamma * std::abs(record.orders[slot_index(asked->type)] - asked->asked_order);
    return d;
}

SkipEstimate order_nn_estimate(EntityType i, const HistoryView& history, const CurrentAssumptions& assumptions,
                               const EstimatorConfig& config, bool asked) {
    require_history(history);
    std::optional<AskedTerm> term;
    if (asked) term = AskedTerm{i, config.gamma, static_cast<int>(assumptions.count())};
    std::vector<double> d;
    d.reserve(history.size());
    for (const auto& r : history.records) d.push_back(order_distance(r, assumptions, config.beta, term));
    return {kernel_fraction(i, history, d, config.weight_alpha),
            asked ? SkipModel::OrderAskedNN : SkipModel::OrderNN};
}

std::vector<OrderVector> orders_set(int M, int assumed_count) {
    if (M < 0 || assumed_count < 0) throw std::invalid_argument("orders_set: negative argument");
    if (M == 0) return {OrderVector{}};
    const auto m = static_cast<std::size_t>(M);
    std::set<OrderVector> result;
    std::set<OrderVector> frontier{OrderVector(m, -1)};
    auto incomplete = [](const OrderVector& o) { return std::find(o.begin(), o.end(), -1) != o.end(); };

    while (std::any_of(frontier.begin(), frontier.end(), incomplete)) {
        std::set<OrderVector> next;
        for (const auto& o : frontier) {
            const int count = static_cast<int>(std::count_if(o.begin(), o.end(), [](int v) { return v != -1; }));
            for (unsigned mask = 1; mask < (1u << m); ++mask) {
                bool clash = false;
                for (std::size_t k = 0; k < m && !clash; ++k) clash = ((mask >> k) & 1u) && o[k] != -1;
                if (clash) continue;
                OrderVector updated = o;
                for (std::size_t k = 0; k < m; ++k) {
                    if ((mask >> k) & 1u) updated[k] = count;
                }
                next.insert(updated);
                if (!incomplete(updated)) {
                    OrderVector shifted = updated;
                    for (auto& v : shifted) v += assumed_count;
                    result.insert(std::move(shifted));
                }
            }
        }
        frontier = std::move(next);
    }
    return {result.begin(), result.end()};
}

std::vector<WeightedOrder> estimated_orders_weights(std::span<const OrderVector> order_set,
                                                    const HistoryView& history,
                                                    const CurrentAssumptions& assumptions, double beta,
                                                    double delta) {
    if (order_set.empty()) throw std::invalid_argument("estimated_orders_weights: empty order set");
    if (!(delta > 0.0)) throw std::invalid_argument("delta must be > 0");
    const auto free_types = assumptions.unassumed();
    for (const auto& o : order_set) {
        if (o.size() != free_types.size()) throw std::invalid_argument("order vector size != unassumed count");
    }

    std::vector<WeightedOrder> out;
    out.reserve(order_set.size());
    if (history.empty()) {
        for (const auto& o : order_set) out.push_back({o, 1.0 / static_cast<double>(order_set.size())});
        return out;
    }

    // D(j, k) for every record j and candidate k.
    std::vector<double> dist(history.size() * order_set.size());
    double dmin = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < order_set.size(); ++k) {
        std::array<int, kNumEntityTypes> imputed{};
        for (std::size_t t = 0; t < kNumEntityTypes; ++t) {
            if (assumptions.assumed[t]) imputed[t] = assumptions.assumed[t]->order;
        }
        for (std::size_t f = 0; f < free_types.size(); ++f) imputed[slot_index(free_types[f])] = order_set[k][f];
        for (std::size_t j = 0; j < history.size(); ++j) {
            const auto& r = history.records[j];
            double order_sum = 0.0;
            for (std::size_t t = 0; t < kNumEntityTypes; ++t) order_sum += std::abs(r.orders[t] - imputed[t]);
            const double d = hamming_distance(r, assumptions) + beta * order_sum;
            dist[k * history.size() + j] = d;
            dmin = std::min(dmin, d);
        }
    }

    std::vector<double> raw(order_set.size(), 0.0);
    for (std::size_t k = 0; k < order_set.size(); ++k) {
        for (std::size_t j = 0; j < history.size(); ++j) {
            raw[k] += std::exp(-delta * (dist[k * history.size() + j] - dmin));
        }
    }
    // Summing in sorted order makes the normalizer independent of candidate order.
    std::vector<double> sorted = raw;
    std::sort(sorted.begin(), sorted.end());
    const double total = std::accumulate(sorted.begin(), sorted.end(), 0.0);
    for (std::size_t k = 0; k < order_set.size(); ++k) out.push_back({order_set[k], raw[k] / total});
    return out;
}

SkipEstimate imputed_order_estimate(EntityType i, const HistoryView& history,
                                    const CurrentAssumptions& assumptions, const OrderVector& imputed,
                                    const EstimatorConfig& config) {
    require_history(history);
    const auto free_types = assumptions.unassumed();
    if (imputed.size() != free_types.size()) throw std::invalid_argument("imputed order has wrong size");
    std::array<int, kNumEntityTypes> full{};
    for (std::size_t t = 0; t < kNumEntityTypes; ++t) {
        if (assumptions.assumed[t]) full[t] = assumptions.assumed[t]->order;
    }
    for (std::size_t f = 0; f < free_types.size(); ++f) full[slot_index(free_types[f])] = imputed[f];

    std::vector<double> d;
    d.reserve(history.size());
    for (const auto& r : history.records) {
        double order_sum = 0.0;
        for (std::size_t t = 0; t < kNumEntityTypes; ++t) order_sum += std::abs(r.orders[t] - full[t]);
        d.push_back(hamming_distance(r, assumptions) + config.beta * order_sum);
    }
    return {kernel_fraction(i, history, d, config.weight_alpha), SkipModel::OrderClassifier};
}

SkipEstimate classifier_estimate(EntityType i, const HistoryView& history, const CurrentAssumptions& assumptions,
                                 const EstimatorConfig& config, bool top_only) {
    require_history(history);
    const int assumed = static_cast<int>(assumptions.count());
    const auto candidates = orders_set(static_cast<int>(kNumEntityTypes) - assumed, assumed);
    const auto weights = estimated_orders_weights(candidates, history, assumptions, config.beta, config.delta);

    if (top_only) {
        double top = 0.0;
        for (const auto& w : weights) top = std::max(top, w.weight);
        double sum = 0.0;
        int n = 0;
        for (const auto& w : weights) {
            if (top - w.weight > 1e-12) continue;
            sum += imputed_order_estimate(i, history, assumptions, w.order, config).p_hat;
            ++n;
        }
        return {sum / n, SkipModel::OrderClassifier};
    }
    double p = 0.0;
    for (const auto& w : weights) p += w.weight * imputed_order_estimate(i, history, assumptions, w.order, config).p_hat;
    return {std::clamp(p, 0.0, 1.0), SkipModel::OrderClassifier};
}

double value_binary_distance(std::span<const std::string> a, std::span<const std::string> b) {
    std::set<std::string> sa(a.begin(), a.end());
    std::set<std::string> sb(b.begin(), b.end());
    if (sa.empty() && sb.empty()) return 0.0;
    std::size_t common = 0;
    for (const auto& v : sa) common += sb.count(v);
    const std::size_t unite = sa.size() + sb.size() - common;
    return 1.0 - static_cast<double>(common) / static_cast<double>(unite);
}

SkipEstimate value_aware_estimate(EntityType i, const HistoryView& history, const CurrentAssumptions& assumptions,
                                  const EstimatorConfig& config) {
    require_history(history);
    std::vector<double> d;
    d.reserve(history.size());
    for (const auto& r : history.records) {
        double value_term = 0.0;
        for (std::size_t t = 0; t < kNumEntityTypes; ++t) {
            const auto& a = assumptions.assumed[t];
            if (!a || a->skipped) continue;
            value_term += value_binary_distance(r.values[t], assumptions.values[t]);
        }
        d.push_back(hamming_distance(r, assumptions) + config.value_weight * value_term);
    }
    return {kernel_fraction(i, history, d, config.weight_alpha), SkipModel::ValueAware};
}

double probability_to_bias(double p_hat, double bias_alpha, bool cubed, bool invert) {
    const double x = p_hat - 0.5;
    double b = -bias_alpha * (cubed ? x * x * x : x);
    return invert ? -b : b;
}

SkipEstimate estimate_skip(SkipModel model, EntityType i, const HistoryView& history,
                           const CurrentAssumptions& assumptions, const EstimatorConfig& config) {
    const std::size_t K = std::max(config.history_capacity, history.size());
    if (model == SkipModel::IntraType || history.empty()) {
        auto est = intra_type(history.skip_column(i), K, config.initial_bias, true);
        est.model = model;
        return est;
    }
    switch (model) {
        case SkipModel::NN: return nn_estimate(i, history, assumptions);
        case SkipModel::WeightedNN: return weighted_nn_estimate(i, history, assumptions, config.weight_alpha);
        case SkipModel::OrderNN: return order_nn_estimate(i, history, assumptions, config, false);
        case SkipModel::OrderAskedNN: return order_nn_estimate(i, history, assumptions, config, true);
        case SkipModel::OrderClassifier: return classifier_estimate(i, history, assumptions, config, false);
        case SkipModel::ValueAware: return value_aware_estimate(i, history, assumptions, config);
        case SkipModel::IntraType: break;
    }
    return {config.initial_bias, model};
}

}  // namespace slotforge
