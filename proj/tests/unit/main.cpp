#define DOCTEST_CONFIG_IMPLEMENT
#include <doctest.h>

int main(int argc, char** argv) {
  doctest::Context ctx;
  // sandboxes and CI runners may look like an attached debugger
  ctx.setOption("no-breaks", true);
  ctx.applyCommandLine(argc, argv);
  return ctx.run();
}
