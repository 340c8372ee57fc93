#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/socket.h>
#include <sys/un.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>

#include "json.hpp"
#include "rumour/relevance_metrics.h"

namespace rumour {

ExternalScorer::ExternalScorer(const std::string& endpoint, std::chrono::milliseconds timeout)
    : timeout_(timeout) {
  if (endpoint.empty()) throw ValidationError("external scorer endpoint is empty");
  if (endpoint.starts_with("unix:")) {
    std::string path = endpoint.substr(5);
    sockaddr_un addr{};
    if (path.size() >= sizeof(addr.sun_path)) throw ValidationError("socket path too long: " + path);
    fd_ = ::socket(AF_UNIX, SOCK_STREAM | SOCK_CLOEXEC, 0);
    if (fd_ < 0) throw ScorerUnavailable(std::string("socket: ") + std::strerror(errno));
    addr.sun_family = AF_UNIX;
    std::memcpy(addr.sun_path, path.c_str(), path.size() + 1);
    if (::connect(fd_, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0) {
      std::string why = std::strerror(errno);
      ::close(fd_);
      fd_ = -1;
      throw ScorerUnavailable("cannot connect to scorer socket " + path + ": " + why);
    }
    return;
  }

  int sv[2];
  if (::socketpair(AF_UNIX, SOCK_STREAM | SOCK_CLOEXEC, 0, sv) != 0)
    throw ScorerUnavailable(std::string("socketpair: ") + std::strerror(errno));
  pid_t pid = ::fork();
  if (pid < 0) {
    ::close(sv[0]);
    ::close(sv[1]);
    throw ScorerUnavailable(std::string("fork: ") + std::strerror(errno));
  }
  if (pid == 0) {
    ::dup2(sv[1], STDIN_FILENO);
    ::dup2(sv[1], STDOUT_FILENO);
    ::execl("/bin/sh", "sh", "-c", endpoint.c_str(), static_cast<char*>(nullptr));
    ::_exit(127);
  }
  ::close(sv[1]);
  fd_ = sv[0];
  child_ = pid;
}

ExternalScorer::~ExternalScorer() {
  if (fd_ >= 0) {
    ::shutdown(fd_, SHUT_RDWR);
    ::close(fd_);
  }
  if (child_ > 0) {
    int status = 0;
    for (int i = 0; i < 50; ++i) {
      if (::waitpid(child_, &status, WNOHANG) != 0) return;
      ::usleep(10000);
    }
    ::kill(child_, SIGTERM);
    ::waitpid(child_, &status, 0);
  }
}

std::string ExternalScorer::read_line() {
  for (;;) {
    auto nl = buffer_.find('\n');
    if (nl != std::string::npos) {
      std::string line = buffer_.substr(0, nl);
      buffer_.erase(0, nl + 1);
      return line;
    }
    pollfd p{fd_, POLLIN, 0};
    int ready = ::poll(&p, 1, static_cast<int>(timeout_.count()));
    if (ready == 0) throw ScorerUnavailable("external scorer timed out");
    if (ready < 0) {
      if (errno == EINTR) continue;
      throw ScorerUnavailable(std::string("poll: ") + std::strerror(errno));
    }
    char buf[4096];
    ssize_t n = ::read(fd_, buf, sizeof(buf));
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) throw ScorerUnavailable("external scorer closed the connection");
    buffer_.append(buf, static_cast<std::size_t>(n));
  }
}

double ExternalScorer::score(const std::string& a, const std::string& b) {
  if (fd_ < 0) throw ScorerUnavailable("external scorer is not connected");
  std::string msg = nlohmann::json{{"a", a}, {"b", b}}.dump() + "\n";
  std::size_t sent = 0;
  while (sent < msg.size()) {
    ssize_t n = ::send(fd_, msg.data() + sent, msg.size() - sent, MSG_NOSIGNAL);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) throw ScorerUnavailable("cannot write to external scorer");
    sent += static_cast<std::size_t>(n);
  }
  std::string line = read_line();
  try {
    auto j = nlohmann::json::parse(line);
    return j.at("score").get<double>();
  } catch (const nlohmann::json::exception&) {
    throw ScorerUnavailable("malformed scorer reply: " + line);
  }
}

}  // namespace rumour
