#include "classmind/fsutil.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <atomic>
#include <cerrno>
#include <cstring>

#include "classmind/error.hpp"
#include "classmind/failpoint.hpp"

namespace classmind::fsutil {

namespace {

std::atomic<unsigned> g_temp_counter{0};

[[noreturn]] void io_fail(const std::string& what, const std::filesystem::path& p) {
  fail(ErrorCode::kNotFound, what + " " + p.string() + ": " + std::strerror(errno));
}

}  // namespace

bool is_temp_name(const std::string& filename) { return filename.find(".tmp-") != std::string::npos; }

void write_atomic(const std::filesystem::path& path, std::string_view bytes) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  const auto tmp = path.string() + ".tmp-" + std::to_string(::getpid()) + "-" +
                   std::to_string(g_temp_counter.fetch_add(1));
  const int fd = ::open(tmp.c_str(), O_WRONLY | O_CREAT | O_TRUNC | O_CLOEXEC, 0644);
  if (fd < 0) io_fail("cannot create", tmp);
  std::size_t written = 0;
  while (written < bytes.size()) {
    const auto n = ::write(fd, bytes.data() + written, bytes.size() - written);
    if (n < 0) {
      if (errno == EINTR) continue;
      ::close(fd);
      io_fail("cannot write", tmp);
    }
    written += static_cast<std::size_t>(n);
  }
  ::fsync(fd);
  ::close(fd);
  failpoint::hit("before_rename:" + path.filename().string());
  if (::rename(tmp.c_str(), path.c_str()) != 0) io_fail("cannot rename onto", path);
}

void remove_stale_temps(const std::filesystem::path& dir) {
  std::error_code ec;
  if (!std::filesystem::is_directory(dir, ec)) return;
  for (const auto& entry : std::filesystem::directory_iterator(dir, ec)) {
    if (entry.is_regular_file() && is_temp_name(entry.path().filename().string())) {
      std::filesystem::remove(entry.path(), ec);
    }
  }
}

}  // namespace classmind::fsutil
