#include "piqa/io_util.hpp"

#include <unistd.h>

#include <fstream>
#include <sstream>
#include <system_error>

#include "piqa/errors.hpp"

namespace piqa {

namespace fs = std::filesystem;

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("read failed: " + path);
  return ss.str();
}

void atomic_write_file(const std::string& path, const std::string& content) {
  const fs::path target(path);
  const fs::path dir = target.parent_path().empty() ? fs::path(".")
                                                    : target.parent_path();
  const fs::path tmp =
      dir / (target.filename().string() + ".tmp." +
             std::to_string(static_cast<unsigned long>(::getpid())));
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open file for writing: " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) {
      std::error_code ec;
      fs::remove(tmp, ec);
      throw IoError("write failed: " + tmp.string());
    }
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw IoError("rename failed for " + path + ": " + ec.message());
  }
}

}  // namespace piqa
