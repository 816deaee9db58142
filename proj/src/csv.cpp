#include <cerrno>
#include <cstring>
#include <fstream>

#include "opencav/studies.hpp"

namespace opencav {

void export_csv(const SweepResult& result, const std::string& path) {
    const std::string text = to_csv(result);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw WriteError("export_csv: cannot open " + path + ": " + std::strerror(errno));
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    out.close();
    if (!out) throw WriteError("export_csv: write failed for " + path);
}

}  // namespace opencav
