#pragma once

#include <atomic>
#include <chrono>
#include <thread>

#include "slotforge/nlu.hpp"

namespace testing {

struct FixedProvider final : slotforge::UnderstandingProvider {
    slotforge::ParsedUtterance out;
    slotforge::ParsedUtterance parse(std::string_view) const override { return out; }
};

struct FailingProvider final : slotforge::UnderstandingProvider {
    slotforge::ParsedUtterance parse(std::string_view) const override {
        throw slotforge::ProviderError("provider unavailable");
    }
};

// Delegates to another provider after a delay.
struct SlowProvider final : slotforge::UnderstandingProvider {
    const slotforge::UnderstandingProvider* inner = nullptr;
    std::chrono::milliseconds delay{200};
    slotforge::ParsedUtterance parse(std::string_view text) const override {
        std::this_thread::sleep_for(delay);
        return inner->parse(text);
    }
};

inline slotforge::EntityMention mention(slotforge::EntityType t, std::string v, double score, std::size_t start,
                                        std::size_t end) {
    return {t, std::move(v), score, {start, end}};
}

}  // namespace testing
