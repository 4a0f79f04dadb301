#include "config.hpp"

#include "fbsde/error.hpp"

#include <fstream>

namespace fbsde::cli {

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return {};
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

}  // namespace

ConfigEntries read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open config file '" + path + "'");
  ConfigEntries entries;
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    const std::string text = trim(line);
    if (text.empty() || text[0] == '#') continue;
    const auto eq = text.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorCode::Parse, path + ":" + std::to_string(number) + ": expected key = value");
    }
    std::string key = trim(text.substr(0, eq));
    while (!key.empty() && key[0] == '-') key.erase(0, 1);
    if (key.empty()) throw Error(ErrorCode::Parse, path + ":" + std::to_string(number) + ": empty key");
    entries.emplace_back(key, trim(text.substr(eq + 1)));
  }
  return entries;
}

std::vector<std::string> expand_config(int argc, const char* const* argv) {
  std::vector<std::string> args;
  std::string config_path;
  for (int k = 0; k < argc; ++k) {
    const std::string a = argv[k];
    if (k > 0 && a == "--config") {
      if (k + 1 >= argc) throw Error(ErrorCode::InvalidArgument, "--config needs a file name");
      config_path = argv[++k];
    } else if (k > 0 && a.rfind("--config=", 0) == 0) {
      config_path = a.substr(9);
    } else {
      args.push_back(a);
    }
  }
  if (config_path.empty()) return args;

  std::vector<std::string> injected;
  for (const auto& [key, value] : read_config_file(config_path)) {
    injected.push_back("--" + key + "=" + value);
  }
  // Insert after the subcommand (the first non-option argument).
  std::size_t at = args.size();
  for (std::size_t k = 1; k < args.size(); ++k) {
    if (args[k].empty() || args[k][0] != '-') {
      at = k + 1;
      break;
    }
  }
  args.insert(args.begin() + static_cast<std::ptrdiff_t>(std::min(at, args.size())), injected.begin(),
              injected.end());
  return args;
}

}  // namespace fbsde::cli
