#pragma once

#include <string>
#include <vector>

#include "daec/cruse.hpp"

namespace daec {

// Checkpoint container: a UTF-8 config header, a terminator line "---\n",
// then named parameter arrays as [u16 name_len][name bytes][u32 count]
// [count x little-endian float32], ended by a record with name_len == 0.
// Values are quantized to float32 on save and load back exactly, so
// save -> load -> save reproduces the file bit for bit.

void save_checkpoint(const std::string& path, const std::string& config_text,
                     const std::vector<NamedParam>& params);

// Returns the header text (everything before the "---" line).
std::string read_checkpoint_config(const std::string& path);

// Fills params from the file body. Array names, order, and sizes must match
// exactly; violations raise IoError naming the offending array.
void load_checkpoint_params(const std::string& path,
                            const std::vector<NamedParam>& params);

// Convenience wrappers for a standalone model. The header's first line tags
// the checkpoint kind so loaders can dispatch.
inline constexpr const char* kKindKey = "model=";

std::string checkpoint_kind(const std::string& path);

void save_cruse(const std::string& path, CruseModel& model, const std::string& kind);
CruseModel load_cruse(const std::string& path, const std::string& expected_kind);

}  // namespace daec
