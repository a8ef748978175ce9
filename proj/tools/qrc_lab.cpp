#include <csignal>
#include <iostream>

#include "qrc/harness/cli.hpp"
#include "qrc/harness/experiments.hpp"

namespace {

extern "C" void on_interrupt(int) { qrc::harness::interrupt_flag().store(true); }

}  // namespace

int main(int argc, char** argv) {
  std::signal(SIGINT, on_interrupt);
  return qrc::harness::run_cli(argc, argv, std::cout, std::cerr);
}
