#pragma once

/** \file checkpoint.hpp
 *  \brief Versioned binary checkpoints.
 *
 * Layout (all integers are little-endian u64, floats little-endian IEEE-754 f64):
 *
 *     "UCR1"                        magic; the last byte is the format version
 *     step
 *     len, bytes                    training config as UTF-8 JSON
 *     count, (len, bytes)*          vocabulary tokens in id order
 *     count, array*                 parameters in ModelParams::flatten() order
 *     count, array*                 AdamW first moments, same order
 *     count, array*                 AdamW second moments, same order
 *
 * where array = rank, dim*, value*. Values round-trip bit-exactly.
 */

#include <cstddef>
#include <filesystem>
#include <iosfwd>

#include "ucr/corpus.hpp"
#include "ucr/model.hpp"
#include "ucr/optimizer.hpp"

namespace ucr {

struct Checkpoint {
    TrainConfig config;
    Vocab vocab;
    ModelParams params;
    AdamState optimizer;
    std::size_t step = 0;
};

/// Fresh model for `vocab` and `cfg`, at step 0.
Checkpoint initial_checkpoint(const Vocab& vocab, const TrainConfig& cfg);

void write_checkpoint(const Checkpoint& ck, std::ostream& out);
/// ParseError for malformed or truncated input, IncompatibleVersionError for
/// a "UCR" file of another version.
Checkpoint read_checkpoint(std::istream& in);

void save_checkpoint(const Checkpoint& ck, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace ucr
