// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>

namespace skillalign {

/// A skill id paired with an alignment score; ranking output unit shared by
/// the lexical and embedding strategies.
struct ScoredSkill {
    std::string skill_id;
    double score = 0.0;
};

}  // namespace skillalign
