#pragma once

#include <cstdio>
#include <string>
#include <vector>

#include "cefr/chat_client.hpp"
#include "cefr/corpus.hpp"
#include "cefr/prompts.hpp"

namespace cefr {

/// Issues the German A1 generation request `n` times and turns each reply into an unreviewed
/// synthetic A1 sample. Texts still need a manual review before they join a dataset, hence
/// needs_review = true. Ids are "<prefix>-0001", "<prefix>-0002", ...
inline std::vector<TextSample> generate_synthetic(const ChatClient& client, std::size_t n,
                                                  const std::string& id_prefix = "synthetic")
{
    if (n < 1) {
        throw InvalidArgument("generate_synthetic needs n >= 1");
    }
    std::vector<TextSample> samples;
    samples.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const Completion c = client.complete({{"user", std::string(prompt_text::synthetic_a1)}}, i);
        if (!c.content) {
            throw EndpointUnreachable("generation request " + std::to_string(i + 1) + " failed: " +
                                      c.error.value_or("unknown error"));
        }
        auto text = trim(*c.content);
        if (text.empty()) {
            throw EmptyGeneration("generation request " + std::to_string(i + 1) + " returned no text");
        }
        char id[32];
        std::snprintf(id, sizeof id, "-%04zu", i + 1);
        TextSample s;
        s.id = id_prefix + id;
        s.text = std::move(text);
        s.source = Source{SourceKind::synthetic, {}};
        s.level = levels::A1;
        s.needs_review = true;
        samples.push_back(std::move(s));
    }
    return samples;
}

} // namespace cefr
