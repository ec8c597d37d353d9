#pragma once

#include <cstdint>
#include <optional>
#include <string>

namespace orgsim {

// Exit codes shared by all commands:
//   0 success, 1 invalid configuration, 2 runtime/IO failure,
//   3 election verification mismatch.

int cmd_run(const std::string& scenario_path, const std::string& out_dir,
            std::optional<std::uint64_t> seed_override);

int cmd_sweep(const std::string& spec_path, const std::string& out_dir);

int cmd_verify(const std::string& scenario_path, std::optional<std::uint64_t> seed_override);

}  // namespace orgsim
