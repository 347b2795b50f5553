#pragma once

#include <sys/wait.h>
#include <unistd.h>

#include <cstdio>
#include <string>
#include <vector>

namespace efpix::test {

struct RunResult {
    int exit_code = -1;
    std::string out;  // stdout only; stderr goes to err
    std::string err;
};

inline std::string shell_quote(const std::string& s) {
    std::string out = "'";
    for (char c : s) {
        if (c == '\'') {
            out += "'\\''";
        } else {
            out.push_back(c);
        }
    }
    out.push_back('\'');
    return out;
}

// Runs the CLI with the given arguments and captures stdout/stderr.
inline RunResult run_cli(const std::vector<std::string>& args,
                         const std::string& err_file = "/tmp/efpix-cli-err.txt") {
    std::string cmd = shell_quote(EFPIX_CLI_PATH);
    for (const std::string& a : args) cmd += " " + shell_quote(a);
    cmd += " 2>" + shell_quote(err_file);

    RunResult result;
    FILE* pipe = popen(cmd.c_str(), "r");
    if (pipe == nullptr) return result;
    char buf[4096];
    std::size_t n;
    while ((n = fread(buf, 1, sizeof buf, pipe)) > 0) result.out.append(buf, n);
    int status = pclose(pipe);
    if (WIFEXITED(status)) result.exit_code = WEXITSTATUS(status);

    if (FILE* err = fopen(err_file.c_str(), "rb")) {
        while ((n = fread(buf, 1, sizeof buf, err)) > 0) result.err.append(buf, n);
        fclose(err);
    }
    return result;
}

}  // namespace efpix::test
