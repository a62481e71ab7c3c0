#include "doctest.h"
#include "properties.hpp"

namespace {

const props::Fixture& soloviev() {
  static const props::Fixture fx(gsrecon::soloviev_case(gsrecon::Soloviev{}, 0.1));
  return fx;
}

const props::Fixture& diverted() {
  static const props::Fixture fx([] {
    gsrecon::ReferenceMachine machine;
    auto mesh = std::make_shared<const gsrecon::Mesh>(machine.mesh(0.12));
    return gsrecon::reference_case(mesh, gsrecon::ProfileShape::Monotonic);
  }());
  return fx;
}

void require(const props::Check& c) {
  INFO(c.describe());
  CHECK(c.ok);
}

}  // namespace

TEST_CASE("adjoint identity") {
  require(props::adjoint_identity(soloviev()));
  require(props::adjoint_identity(diverted()));
}

TEST_CASE("observation rows are affine") {
  require(props::affinity(soloviev()));
  require(props::affinity(diverted()));
}

TEST_CASE("partition of unity") { require(props::partition_of_unity()); }

TEST_CASE("psibar is invariant under affine maps of psi") {
  require(props::psibar_affine_invariance(soloviev()));
  require(props::psibar_affine_invariance(diverted()));
}

TEST_CASE("vacuum constant flux") {
  require(props::vacuum_constant_flux(soloviev()));
  require(props::vacuum_constant_flux(diverted()));
}
