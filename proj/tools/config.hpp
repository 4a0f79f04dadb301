#pragma once

// key=value configuration files for the command line tool. Every key is the
// long name of a flag of the chosen subcommand; values on the command line
// win over values from the file.

#include <string>
#include <utility>
#include <vector>

namespace fbsde::cli {

using ConfigEntries = std::vector<std::pair<std::string, std::string>>;

/// Reads "key = value" lines; blank lines and lines starting with '#' are
/// skipped. Throws fbsde::Error(Parse) on a line without '='.
ConfigEntries read_config_file(const std::string& path);

/// Returns argv with `--config PATH` removed and the file entries inserted as
/// `--key=value` right after the subcommand name, so that later command-line
/// occurrences take precedence.
std::vector<std::string> expand_config(int argc, const char* const* argv);

}  // namespace fbsde::cli
