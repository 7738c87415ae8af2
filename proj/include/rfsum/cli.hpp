#pragma once

namespace rfsum {

// Full command-line surface of the rfsum binary: ingest, train, eval,
// summarize, baseline, gen-synthetic. Returns the process exit code; all
// library errors are reported as one line on stderr in the form
//   error: <category>: <detail>
int run_cli(int argc, const char* const* argv);

}  // namespace rfsum
