#pragma once

#include <cstdint>
#include <string>

#include "negpr/branch.hpp"

namespace negpr {

// On-disk snapshot of both trained branches. JSON with shape-tagged arrays;
// doubles are written so that they re-parse to the same bits.
struct Checkpoint {
    int format_version = 1;
    BranchParams ib;
    BranchParams eb;

    bool operator==(const Checkpoint&) const = default;
};

void save_checkpoint(const Checkpoint& ck, const std::string& path);
// Throws DataError on unreadable files, malformed JSON, unknown versions or
// shape mismatches.
Checkpoint load_checkpoint(const std::string& path);

// FNV-1a over the raw file bytes; used to compare checkpoints across runs.
std::uint64_t fnv1a_file(const std::string& path);

}  // namespace negpr
