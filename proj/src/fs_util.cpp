#include "scsl/fs_util.hpp"

#include <fstream>
#include <sstream>

#include "scsl/errors.hpp"

namespace scsl {

void write_text_atomic(const std::filesystem::path& file, const std::string& content) {
    namespace fs = std::filesystem;
    fs::path tmp = file;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot open for writing: " + tmp.string());
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!out) throw Error("write failed: " + tmp.string());
    }
    std::error_code ec;
    fs::rename(tmp, file, ec);
    if (ec) throw Error("rename failed: " + tmp.string() + " -> " + file.string());
}

std::string read_text(const std::filesystem::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw Error("cannot open: " + file.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace scsl
