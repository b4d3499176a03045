from ncgeo.api.router import SuiteRouter
from ncgeo.api.schemas import SuiteName
from ncgeo.api.suites import algebra, ce, connections, connes, jets, matrix_geometry, universal

ROUTERS: dict[SuiteName, SuiteRouter] = {
    module.router.name: module.router
    for module in (algebra, universal, jets, ce, connections, matrix_geometry, connes)
}
