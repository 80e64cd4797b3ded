#pragma once

#include "cefr/chat_client.hpp"
#include "cefr/classify.hpp"
#include "cefr/corpus.hpp"
#include "cefr/embeddings.hpp"
#include "cefr/error.hpp"
#include "cefr/finetune.hpp"
#include "cefr/levels.hpp"
#include "cefr/metrics.hpp"
#include "cefr/metrics_io.hpp"
#include "cefr/mlp.hpp"
#include "cefr/probe.hpp"
#include "cefr/prompts.hpp"
#include "cefr/random.hpp"
#include "cefr/splits.hpp"
#include "cefr/synthetic.hpp"
