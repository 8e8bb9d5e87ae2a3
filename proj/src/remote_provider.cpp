#include <algorithm>

#include "httplib.h"
#include "json.hpp"
#include "slotforge/nlu.hpp"

namespace slotforge {

using nlohmann::json;

RemoteProvider::RemoteProvider(std::string base_url, std::chrono::milliseconds timeout)
    : base_url_(std::move(base_url)), timeout_(timeout) {
    while (!base_url_.empty() && base_url_.back() == '/') base_url_.pop_back();
}

ParsedUtterance RemoteProvider::decode(std::string_view body, std::size_t text_length) {
    json doc;
    try {
        doc = json::parse(body);
    } catch (const json::exception& e) {
        throw ProviderError(std::string("malformed provider response: ") + e.what());
    }
    try {
        ParsedUtterance out;
        const auto intent = doc.value("intent", std::string("none"));
        if (intent == "specify" || intent == "Specify") {
            out.intent = Intent::Specify;
        } else if (intent == "refuse" || intent == "Refuse") {
            out.intent = Intent::Refuse;
        } else {
            out.intent = Intent::None;
        }
        out.intent_score = doc.value("score", 0.0);
        for (const auto& e : doc.value("entities", json::array())) {
            const auto type = entity_type_from_string(e.at("type").get<std::string>());
            if (!type) continue;
            const auto start = e.at("start").get<std::size_t>();
            const auto end = e.at("end").get<std::size_t>();
            if (start > end || end >= text_length) continue;
            out.mentions.push_back({*type, e.at("value").get<std::string>(), e.at("score").get<double>(),
                                    {start, end}});
        }
        return out;
    } catch (const json::exception& e) {
        throw ProviderError(std::string("invalid provider response: ") + e.what());
    }
}

ParsedUtterance RemoteProvider::parse(std::string_view text) const {
    httplib::Client client(base_url_);
    const auto secs = timeout_.count() / 1000;
    const auto usecs = (timeout_.count() % 1000) * 1000;
    client.set_connection_timeout(secs, usecs);
    client.set_read_timeout(secs, usecs);
    client.set_write_timeout(secs, usecs);
    const json payload{{"text", std::string(text)}};
    auto res = client.Post("/parse", payload.dump(), "application/json");
    if (!res) throw ProviderError("provider unreachable: " + httplib::to_string(res.error()));
    if (res->status < 200 || res->status >= 300) {
        throw ProviderError("provider returned HTTP " + std::to_string(res->status));
    }
    return decode(res->body, text.size());
}

}  // namespace slotforge
