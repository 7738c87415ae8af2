#pragma once

#include <string>

#include "rfsum/corpus.hpp"
#include "rfsum/rng.hpp"
#include "rfsum/tensor.hpp"

namespace rfsum {

// Trainable |V| x d table, uniformly initialized in [-0.1, 0.1]. One table is
// shared by both encoders and the decoder.
TensorRef init_embedding_table(int vocab_size, int dim, Rng& rng);

// Overwrites table rows for tokens found in a text vector file (one entry per
// line: token then d reals, single-space separated). Rows for absent tokens
// keep their random initialization. Returns how many vocabulary tokens
// matched.
int load_pretrained(const std::string& path, const Vocabulary& vocab,
                    const TensorRef& table);

}  // namespace rfsum
