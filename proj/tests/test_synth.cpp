#include <doctest.h>

TEST_SUITE("synth") {}
