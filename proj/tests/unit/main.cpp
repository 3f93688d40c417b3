#define DOCTEST_CONFIG_IMPLEMENT
#include <doctest.h>

#include "padme/log.hpp"

int main(int argc, char** argv) {
  padme::set_log_sink({});
  doctest::Context ctx(argc, argv);
  return ctx.run();
}
