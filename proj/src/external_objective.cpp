#include "simplexbo/external_objective.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <mutex>

extern char** environ;

namespace simplexbo {

namespace {

// A child that never reads its input must not kill us with SIGPIPE.
void ignore_sigpipe() {
  static std::once_flag once;
  std::call_once(once, [] { ::signal(SIGPIPE, SIG_IGN); });
}

class Fd {
 public:
  Fd() = default;
  explicit Fd(int fd) : fd_(fd) {}
  Fd(Fd&& other) noexcept : fd_(other.fd_) { other.fd_ = -1; }
  Fd(const Fd&) = delete;
  Fd& operator=(const Fd&) = delete;
  ~Fd() { reset(); }
  int get() const { return fd_; }
  void reset() {
    if (fd_ >= 0) ::close(fd_);
    fd_ = -1;
  }

 private:
  int fd_ = -1;
};

struct Pipe {
  Fd read_end;
  Fd write_end;
};

Pipe make_pipe() {
  int fds[2];
  if (::pipe2(fds, O_CLOEXEC) != 0) throw ProcessFailed(std::string("pipe: ") + std::strerror(errno));
  return {Fd(fds[0]), Fd(fds[1])};
}

}  // namespace

std::string format_coordinates(const SimplexPoint& x) {
  std::string line;
  char buf[32];
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g", x[i]);
    if (i > 0) line += ' ';
    line += buf;
  }
  line += '\n';
  return line;
}

std::string run_external(const std::string& command, const std::string& input, double timeout_seconds) {
  ignore_sigpipe();
  Pipe in = make_pipe();
  Pipe out = make_pipe();
  Fd& in_read = in.read_end;
  Fd& in_write = in.write_end;
  Fd& out_read = out.read_end;
  Fd& out_write = out.write_end;

  posix_spawn_file_actions_t actions;
  posix_spawn_file_actions_init(&actions);
  posix_spawn_file_actions_adddup2(&actions, in_read.get(), STDIN_FILENO);
  posix_spawn_file_actions_adddup2(&actions, out_write.get(), STDOUT_FILENO);
  const char* argv[] = {"sh", "-c", command.c_str(), nullptr};
  pid_t pid = -1;
  const int rc = ::posix_spawn(&pid, "/bin/sh", &actions, nullptr, const_cast<char* const*>(argv), environ);
  posix_spawn_file_actions_destroy(&actions);
  if (rc != 0) throw ProcessFailed(std::string("spawn: ") + std::strerror(rc));
  in_read.reset();
  out_write.reset();

  const auto deadline =
      std::chrono::steady_clock::now() + std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                                             std::chrono::duration<double>(timeout_seconds));
  auto kill_child = [&] {
    ::kill(pid, SIGKILL);
    int status = 0;
    ::waitpid(pid, &status, 0);
  };

  // Input lines are short; a blocking write cannot stall on a pipe buffer.
  std::size_t written = 0;
  while (written < input.size()) {
    const ssize_t n = ::write(in_write.get(), input.data() + written, input.size() - written);
    if (n < 0) {
      if (errno == EINTR) continue;
      break;  // the child closed its input; its reply decides the outcome
    }
    written += static_cast<std::size_t>(n);
  }
  in_write.reset();

  std::string output;
  char buf[4096];
  for (;;) {
    const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
    if (left.count() <= 0) {
      kill_child();
      throw ObjectiveTimeout("external objective timed out after " + std::to_string(timeout_seconds) + " s");
    }
    pollfd pfd{out_read.get(), POLLIN, 0};
    const int ready = ::poll(&pfd, 1, static_cast<int>(std::min<long long>(left.count(), 1 << 30)));
    if (ready < 0) {
      if (errno == EINTR) continue;
      kill_child();
      throw ProcessFailed(std::string("poll: ") + std::strerror(errno));
    }
    if (ready == 0) continue;
    const ssize_t n = ::read(out_read.get(), buf, sizeof buf);
    if (n < 0) {
      if (errno == EINTR) continue;
      kill_child();
      throw ProcessFailed(std::string("read: ") + std::strerror(errno));
    }
    if (n == 0) break;
    output.append(buf, static_cast<std::size_t>(n));
  }

  int status = 0;
  while (::waitpid(pid, &status, 0) < 0) {
    if (errno != EINTR) throw ProcessFailed(std::string("waitpid: ") + std::strerror(errno));
  }
  if (WIFSIGNALED(status)) {
    throw ProcessFailed("external objective killed by signal " + std::to_string(WTERMSIG(status)));
  }
  if (!WIFEXITED(status) || WEXITSTATUS(status) != 0) {
    throw ProcessFailed("external objective exited with status " + std::to_string(WEXITSTATUS(status)));
  }
  return output;
}

double evaluate_external(const std::string& command, const SimplexPoint& x, double timeout_seconds) {
  if (!(timeout_seconds > 0.0)) throw std::invalid_argument("evaluate_external: timeout must be positive");
  const std::string out = run_external(command, format_coordinates(x), timeout_seconds);
  const auto first = out.find_first_not_of(" \t\r\n");
  const auto last = out.find_last_not_of(" \t\r\n");
  if (first == std::string::npos) throw NonNumericReply("external objective produced no output");
  const std::string text = out.substr(first, last - first + 1);
  char* end = nullptr;
  errno = 0;
  const double value = std::strtod(text.c_str(), &end);
  if (end != text.c_str() + text.size() || errno == ERANGE) {
    throw NonNumericReply("external objective reply is not a number: '" + text + "'");
  }
  return value;
}

std::function<double(const SimplexPoint&)> external_objective(std::string command, double timeout_seconds) {
  if (command.empty()) throw std::invalid_argument("external_objective: empty command");
  return [command = std::move(command), timeout_seconds](const SimplexPoint& x) {
    return evaluate_external(command, x, timeout_seconds);
  };
}

}  // namespace simplexbo
