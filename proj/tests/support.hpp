#pragma once

#include "promptforge/gateway.hpp"
#include "promptforge/persistence.hpp"

#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace pftest {

namespace fs = std::filesystem;

inline fs::path data_path(const std::string& name) { return fs::path(PF_DATA_DIR) / name; }

class TempDir {
public:
    TempDir() {
        std::string tmpl = (fs::temp_directory_path() / "promptforge-XXXXXX").string();
        if (!mkdtemp(tmpl.data())) throw std::runtime_error("mkdtemp failed");
        path_ = tmpl;
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const fs::path& path() const { return path_; }
    fs::path operator/(const std::string& name) const { return path_ / name; }

private:
    fs::path path_;
};

inline std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void spit(const fs::path& p, const std::string& content) {
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    out << content;
}

struct CliResult {
    int exit_code = -1;
    std::string output;
};

/// Runs the CLI with stderr folded into stdout.
inline CliResult run_cli(const std::string& args) {
    std::string cmd = std::string("\"") + PF_CLI_PATH + "\" " + args + " 2>&1";
    CliResult r;
    FILE* pipe = popen(cmd.c_str(), "r");
    if (!pipe) return r;
    std::array<char, 4096> buf{};
    while (auto n = fread(buf.data(), 1, buf.size(), pipe)) r.output.append(buf.data(), n);
    int status = pclose(pipe);
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

inline std::string quote(const fs::path& p) { return "\"" + p.string() + "\""; }

inline std::int64_t calls(const promptforge::LedgerReport& r, promptforge::StageTag tag) {
    return r.per_stage.at(tag).calls;
}

/// Ledger records without wall-clock time, one JSON object per line.
inline std::string ledger_without_timing(const fs::path& path) {
    auto records = promptforge::CallLedger::load(path).records();
    for (auto& r : records) r.wall_ms = 0;
    return promptforge::CallLedger(std::move(records)).to_jsonl();
}

}  // namespace pftest
