#include <catch2/catch_amalgamated.hpp>

#include "property_checks.hpp"

using namespace eigcd;

TEST_CASE("eigenvalue interlacing under orthonormal projection") {
  std::mt19937_64 rng(101);
  CHECK(propcheck::check_eigenvalue_interlacing(100, rng) < 1e-9);
}

TEST_CASE("singular value interlacing under two-sided projection") {
  std::mt19937_64 rng(102);
  CHECK(propcheck::check_singular_value_interlacing(100, rng) < 1e-10);
}

TEST_CASE("skew matrices: singular values equal eigenvalue moduli") {
  std::mt19937_64 rng(103);
  CHECK(propcheck::check_skew_singular_values(100, rng) < 1e-9);
}

TEST_CASE("AB and A^T B^T share nonzero eigenvalues") {
  std::mt19937_64 rng(104);
  CHECK(propcheck::check_shared_nonzero_eigenvalues(100, rng) < 1e-9);
}

TEST_CASE("spectral radius subadditivity over skew blocks") {
  std::mt19937_64 rng(105);
  CHECK(propcheck::check_subadditivity(100, rng) <= 1e-10);
}
