#pragma once

namespace xfl::cli {

/// Exit codes: 0 when every check passes, 2 on a check failure, 1 on a
/// config or runtime error.
int run(int argc, char** argv);

}  // namespace xfl::cli
