#pragma once

#include <functional>
#include <string>
#include <vector>

namespace acceptance {

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  std::string name;
  std::function<Outcome()> run;
  double time_limit = 0.0;  // seconds; 0 means none
};

std::vector<Criterion>& Registry();

struct Registrar {
  Registrar(std::string name, std::function<Outcome()> fn, double time_limit = 0.0) {
    Registry().push_back({std::move(name), std::move(fn), time_limit});
  }
};

// Path of the command-line tool, set from argv.
const std::string& CliPath();

}  // namespace acceptance

#define ACCEPTANCE_CONCAT_(a, b) a##b
#define ACCEPTANCE_CONCAT(a, b) ACCEPTANCE_CONCAT_(a, b)
#define TIMED_CRITERION(name, seconds)                                   \
  static acceptance::Outcome ACCEPTANCE_CONCAT(Criterion_, __LINE__)();  \
  static acceptance::Registrar ACCEPTANCE_CONCAT(registrar_, __LINE__)( \
      name, ACCEPTANCE_CONCAT(Criterion_, __LINE__), seconds);           \
  static acceptance::Outcome ACCEPTANCE_CONCAT(Criterion_, __LINE__)()
#define CRITERION(name) TIMED_CRITERION(name, 0.0)
