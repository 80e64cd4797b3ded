#pragma once

// Chat-format training files for supervised fine-tuning. Each record holds the structured turns
// and the same turns flattened with the target model family's special tokens:
//   {"id": ..., "level": "B1", "messages": [system, user, assistant], "text": "<|begin_of_text|>..."}
// The assistant turn is the bare level label.

#include <fstream>
#include <ostream>
#include <span>
#include <string>

#include <nlohmann/json.hpp>

#include "cefr/corpus.hpp"
#include "cefr/prompts.hpp"

namespace cefr {

/// Delimiters around each turn; defaults follow the Llama 3 instruct chat template.
struct ChatLayout
{
    std::string begin_text = "<|begin_of_text|>";
    std::string header_start = "<|start_header_id|>";
    std::string header_end = "<|end_header_id|>\n\n";
    std::string turn_end = "<|eot_id|>";
};

struct FinetuneExportConfig
{
    PromptTemplate prompt = german_zero_shot_template();
    ChatLayout layout;
};

inline std::string render_chat(const std::vector<ChatMessage>& turns, const ChatLayout& layout)
{
    std::string out = layout.begin_text;
    for (const auto& t : turns) {
        out += layout.header_start;
        out += t.role;
        out += layout.header_end;
        out += t.content;
        out += layout.turn_end;
    }
    return out;
}

inline nlohmann::ordered_json finetune_record(const TextSample& sample, const FinetuneExportConfig& config)
{
    if (!sample.level) {
        throw UnlabeledSample(sample.id);
    }
    auto turns = render_prompt(config.prompt, sample);
    turns.push_back({"assistant", sample.level->str()});
    nlohmann::ordered_json messages = nlohmann::ordered_json::array();
    for (const auto& t : turns) {
        messages.push_back({{"role", t.role}, {"content", t.content}});
    }
    nlohmann::ordered_json j;
    j["id"] = sample.id;
    j["level"] = sample.level->str();
    j["messages"] = std::move(messages);
    j["text"] = render_chat(turns, config.layout);
    return j;
}

/// Writes one record per sample in input order. All samples are checked before anything is written.
inline void export_finetune(std::ostream& out, std::span<const TextSample> samples,
                            const FinetuneExportConfig& config = {})
{
    for (const auto& s : samples) {
        if (!s.level) {
            throw UnlabeledSample(s.id);
        }
    }
    for (const auto& s : samples) {
        out << finetune_record(s, config).dump() << '\n';
    }
}

/// LoRA recipe for the external trainer, recorded alongside the training file.
inline nlohmann::ordered_json finetune_hyperparameters()
{
    nlohmann::ordered_json training;
    training["learning_rate"] = 2e-4;
    training["num_epochs"] = 5;
    training["epoch_cutoff"] = 3;
    training["batch_size"] = 1;
    training["gradient_accumulation_steps"] = 1;
    training["warmup_steps"] = 400;
    training["weight_decay"] = 0.001;
    training["lr_scheduler"] = "linear";
    nlohmann::ordered_json lora;
    lora["r"] = 32;
    lora["alpha"] = 32;
    lora["dropout"] = 0.03;
    lora["target_modules"] = {"q_proj", "k_proj", "v_proj", "o_proj", "gate_proj", "up_proj", "down_proj"};
    lora["bias"] = "none";
    lora["gradient_checkpointing"] = true;
    lora["use_dora"] = false;
    lora["use_rslora"] = false;
    nlohmann::ordered_json j;
    j["base_model"] = "meta-llama/Meta-Llama-3-8B-Instruct";
    j["training"] = std::move(training);
    j["lora"] = std::move(lora);
    return j;
}

} // namespace cefr
