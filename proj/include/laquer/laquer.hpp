#pragma once

#include "laquer/error.hpp"
#include "laquer/utf8.hpp"
#include "laquer/model.hpp"
#include "laquer/metadata.hpp"
#include "laquer/lexicon.hpp"
#include "laquer/tokenize.hpp"
#include "laquer/edit_script.hpp"
#include "laquer/align.hpp"
#include "laquer/fuzzy.hpp"
#include "laquer/sentences.hpp"
#include "laquer/provider.hpp"
#include "laquer/prompt_template.hpp"
#include "laquer/decontext.hpp"
#include "laquer/generation.hpp"
#include "laquer/sources_view.hpp"
#include "laquer/prompt_attrib.hpp"
#include "laquer/hidden_states.hpp"
#include "laquer/internals.hpp"
#include "laquer/lexical_states.hpp"
#include "laquer/metrics.hpp"
#include "laquer/synth.hpp"
#include "laquer/json_io.hpp"
#include "laquer/mock_provider.hpp"
#include "laquer/session.hpp"
#include "laquer/pipeline.hpp"
