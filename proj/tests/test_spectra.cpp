#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "susyqm/catalog.hpp"
#include "susyqm/riccati.hpp"
#include "susyqm/spectra.hpp"

using namespace susyqm;

namespace {

ParametricPotential free_particle() {
    ParametricPotential V;
    V.id = "free";
    V.evaluate = [](double, const ParamPoint&) { return 0.0; };
    V.domain = Interval{};
    return V;
}

ParametricPotential line_oscillator() {
    ParametricPotential V;
    V.id = "line-oscillator";
    V.evaluate = [](double x, const ParamPoint&) { return x * x; };
    V.domain = Interval{};
    return V;
}

FactorizationPair line_oscillator_pair() {
    FactorizationPair p;
    p.potential_id = "line-oscillator";
    p.order = OperatorOrder::AdaggerA;
    p.w.description = "x";
    p.w.evaluate = [](double x, const ParamPoint&) { return x; };
    p.w.derivative = [](double, const ParamPoint&) { return 1.0; };
    p.w.antiderivative = [](double x, const ParamPoint&) { return 0.5 * x * x; };
    p.energy = [](const ParamPoint&) { return 1.0; };
    return p;
}

} // namespace

TEST_CASE("discretization produces the 3-point Laplacian stencil") {
    Grid g(0.0, 1.0, 18, 0);
    DiscretizedHamiltonian H = discretize(free_particle(), ParamPoint{}, g);
    const double inv_h2 = 1.0 / (g.spacing() * g.spacing());
    REQUIRE(H.dim() == 16);
    REQUIRE(H.off_diagonal.size() == 15);
    for (double d : H.diagonal) CHECK(d == 2.0 * inv_h2);
    for (double e : H.off_diagonal) CHECK(e == -inv_h2);
}

TEST_CASE("discretization refuses a grid crossing a singularity") {
    auto built = special_family(1.0, 0.0); // pole at x = 0
    const CatalogEntry& e = std::get<CatalogEntry>(built);
    Grid bad = Grid::centered(-1.0, 6.0, 201);
    CHECK_THROWS_AS(discretize(e.potential, e.default_params, bad), GridError);
}

TEST_CASE("free particle levels match the discrete closed form") {
    Grid g(0.0, 1.0, 201, 0);
    DiscretizedHamiltonian H = discretize(free_particle(), ParamPoint{}, g);
    SpectrumResult sp = eigen_lowest(H, 3);
    const double h = g.spacing();
    for (std::size_t m = 1; m <= 3; ++m) {
        const double pi = M_PI;
        const double discrete =
            4.0 / (h * h) * std::pow(std::sin(0.5 * static_cast<double>(m) * pi * h), 2);
        CHECK(sp.eigenvalues[m - 1] == Catch::Approx(discrete).epsilon(1e-10));
        // and the continuum value (m pi)^2 to O(h^2)
        CHECK(std::abs(sp.eigenvalues[m - 1] - static_cast<double>(m * m) * pi * pi) <
              30.0 * h * h * static_cast<double>(m * m * m * m));
    }
}

TEST_CASE("eigen_lowest validates its level count") {
    Grid g(0.0, 1.0, 64, 0);
    DiscretizedHamiltonian H = discretize(free_particle(), ParamPoint{}, g);
    CHECK_THROWS_AS(eigen_lowest(H, 0), GridError);
    CHECK_THROWS_AS(eigen_lowest(H, 40), GridError);
}

TEST_CASE("harmonic oscillator spectrum 1, 3, 5") {
    Grid g = Grid::centered(-12.0, 12.0, 3001);
    SpectrumResult sp = eigen_lowest(discretize(line_oscillator(), ParamPoint{}, g), 3);
    CHECK(std::abs(sp.eigenvalues[0] - 1.0) < 2e-3);
    CHECK(std::abs(sp.eigenvalues[1] - 3.0) < 2e-3);
    CHECK(std::abs(sp.eigenvalues[2] - 5.0) < 2e-3);

    // ground state has no interior sign change
    const SampledFunction& psi = sp.eigenvectors[0];
    int sign_changes = 0;
    for (std::size_t i = 2; i + 2 < psi.size(); ++i)
        if (psi.value(i) * psi.value(i + 1) < 0.0) ++sign_changes;
    CHECK(sign_changes == 0);
}

TEST_CASE("eigenpairs satisfy the eigenvalue equation") {
    Grid g = Grid::centered(-12.0, 12.0, 2001);
    DiscretizedHamiltonian H = discretize(line_oscillator(), ParamPoint{}, g);
    SpectrumResult sp = eigen_lowest(H, 4);
    double scale = 0.0;
    for (double d : H.diagonal) scale = std::max(scale, std::abs(d));
    for (std::size_t j = 0; j < 4; ++j) {
        SampledFunction r = H.apply(sp.eigenvectors[j]);
        double num = 0.0, den = 0.0;
        for (std::size_t i = 1; i + 1 < g.size(); ++i) {
            const double diff = r.value(i) - sp.eigenvalues[j] * sp.eigenvectors[j].value(i);
            num += diff * diff;
            den += sp.eigenvectors[j].value(i) * sp.eigenvectors[j].value(i);
        }
        CHECK(std::sqrt(num / den) < 1e-9 * scale);
    }
}

TEST_CASE("radial oscillator levels 4n + 2l + 3") {
    CatalogEntry e = radial_oscillator();
    ParamPoint a{{"l", 1.0}};
    SpectrumResult sp = eigen_lowest(discretize(e.potential, a, e.main_grid), 3);
    CHECK(std::abs(sp.eigenvalues[0] - 5.0) < 5e-3);
    CHECK(std::abs(sp.eigenvalues[1] - 9.0) < 5e-3);
    CHECK(std::abs(sp.eigenvalues[2] - 13.0) < 5e-3);
}

TEST_CASE("Poschl-Teller levels and O(h^2) convergence") {
    CatalogEntry e = poschl_teller();
    ParamPoint a{{"alpha", 1.0}, {"lambda", 4.0}};
    const double exact[3] = {-9.0, -4.0, -1.0};

    auto max_err = [&](std::size_t n) {
        Grid g = Grid::centered(-12.0, 12.0, n);
        SpectrumResult sp = eigen_lowest(discretize(e.potential, a, g), 3);
        double m = 0.0;
        for (int j = 0; j < 3; ++j) m = std::max(m, std::abs(sp.eigenvalues[j] - exact[j]));
        return m;
    };
    const double e1 = max_err(3001);
    CHECK(e1 < 2e-3);
    const double e2 = max_err(6001);
    CHECK(e1 / e2 > 3.0); // second-order discretization
    CHECK(e1 / e2 < 6.0);
}

TEST_CASE("annihilation check separates the oscillator branches") {
    CatalogEntry e = radial_oscillator();
    ParamPoint a{{"l", 1.0}};

    // d = 2l+3 branch: psi0 ~ r^{l+1} e^{-r^2/2}
    AnnihilationReport good = annihilation_check(e.factorizations[1], a, e.main_grid);
    CHECK(good.normalizable);
    CHECK(good.norm_ratio < 1e-6);

    // d = -(2l-1) branch: psi0 ~ r^{-l} e^{-r^2/2} diverges at the origin
    AnnihilationReport bad = annihilation_check(e.factorizations[0], a, e.main_grid);
    CHECK_FALSE(bad.normalizable);
    CHECK(bad.boundary_decay > 0.1);
}

TEST_CASE("a constant candidate violates the decay criterion") {
    ParametricPotential V = free_particle();
    FactorizationPair p;
    p.potential_id = "free";
    p.order = OperatorOrder::AdaggerA;
    p.w.evaluate = [](double, const ParamPoint&) { return 0.0; };
    p.w.derivative = [](double, const ParamPoint&) { return 0.0; };
    p.w.antiderivative = [](double, const ParamPoint&) { return 0.0; };
    p.energy = [](const ParamPoint&) { return 0.0; };
    Grid g(0.0, 1.0, 101, 0);
    AnnihilationReport rep = annihilation_check(p, ParamPoint{}, g);
    CHECK_FALSE(rep.normalizable);
    CHECK(rep.norm_ratio < 1e-10); // A psi0 = 0 exactly for constant psi0
}

TEST_CASE("reversed-order pairs test the candidate annihilated by A-dagger") {
    CatalogEntry e = radial_oscillator();
    ParamPoint a{{"l", 1.0}};
    // (W = -l/r + r, 2l-1, AA-dagger): candidate exp(+int W) = r^{-l} e^{r^2/2}
    AnnihilationReport r3 = annihilation_check(e.factorizations[3], a, e.main_grid);
    CHECK_FALSE(r3.normalizable);
    // (W = (l+1)/r + r, -(2l+3), AA-dagger): candidate r^{l+1} e^{+r^2/2}
    AnnihilationReport r2 = annihilation_check(e.factorizations[2], a, e.main_grid);
    CHECK_FALSE(r2.normalizable);
}

TEST_CASE("normalizable factorization energies reappear as lowest eigenvalues") {
    {
        CatalogEntry e = radial_oscillator();
        for (double l : {1.0, 2.0}) {
            ParamPoint a{{"l", l}};
            AnnihilationReport ann = annihilation_check(e.factorizations[1], a, e.main_grid);
            REQUIRE(ann.normalizable);
            SpectrumResult sp = eigen_lowest(discretize(e.potential, a, e.main_grid), 1);
            CHECK(std::abs(sp.eigenvalues[0] - e.factorizations[1].energy(a)) < 5e-3);
        }
    }
    {
        CatalogEntry e = poschl_teller();
        ParamPoint a{{"alpha", 1.0}, {"lambda", 4.0}};
        AnnihilationReport ann = annihilation_check(e.factorizations[1], a, e.main_grid);
        REQUIRE(ann.normalizable);
        SpectrumResult sp = eigen_lowest(discretize(e.potential, a, e.main_grid), 1);
        CHECK(std::abs(sp.eigenvalues[0] - e.factorizations[1].energy(a)) < 2e-3);
    }
}

TEST_CASE("the ladder operator annihilates the ground candidate") {
    CatalogEntry e = radial_oscillator();
    ParamPoint a{{"l", 1.0}};
    AnnihilationReport ann = annihilation_check(e.factorizations[1], a, e.main_grid);
    REQUIRE(ann.normalizable);
    SampledFunction zero = apply_ladder(e.factorizations[1], a, ann.psi0, false);
    CHECK(zero.l2_norm() / ann.psi0.l2_norm() < 1e-4);
}

TEST_CASE("A-dagger-A plus d reproduces H on smooth test functions") {
    CatalogEntry e = radial_oscillator();
    ParamPoint a{{"l", 2.0}};
    const Grid& g = e.main_grid;
    DiscretizedHamiltonian H = discretize(e.potential, a, g);
    const FactorizationPair& pair = e.factorizations[0];
    const double d = pair.energy(a);

    const double packs[5][4] = {{1.0, 0.3, 3.0, 1.2},
                                {2.2, 1.1, 4.0, 1.0},
                                {0.7, 2.0, 2.6, 1.4},
                                {3.0, 0.0, 5.0, 1.1},
                                {1.6, 0.8, 3.5, 0.9}};
    for (const auto& pk : packs) {
        SampledFunction psi = sample(g, [&](double r) {
            const double t = (r - pk[2]) / pk[3];
            return r * r * r * std::exp(-t * t) * std::sin(pk[0] * r + pk[1]);
        });
        SampledFunction Apsi = apply_ladder(pair, a, psi, false);
        SampledFunction AdAspsi = apply_ladder(pair, a, Apsi, true);
        SampledFunction Hpsi = H.apply(psi);
        double num = 0.0, den = 0.0;
        for (std::size_t i = 0; i < g.size(); ++i) {
            if (AdAspsi.masked(i) || Hpsi.masked(i)) continue;
            const double lhs = AdAspsi.value(i) + d * psi.value(i);
            num += (lhs - Hpsi.value(i)) * (lhs - Hpsi.value(i));
            den += Hpsi.value(i) * Hpsi.value(i);
        }
        CHECK(std::sqrt(num / den) < 1e-4);
    }
}

TEST_CASE("A maps eigenvectors of H to eigenvectors of the partner") {
    CatalogEntry e = poschl_teller();
    ParamPoint a{{"alpha", 1.0}, {"lambda", 4.0}};
    const Grid& g = e.main_grid;
    const FactorizationPair& pair = e.factorizations[1]; // normalizable branch

    SpectrumResult sp = eigen_lowest(discretize(e.potential, a, g), 3);
    SampledFunction partner = pair.partner(a, g);
    SpectrumResult spt = eigen_lowest(discretize_samples(partner), 2);

    for (std::size_t n = 1; n <= 2; ++n) {
        SampledFunction mapped = apply_ladder(pair, a, sp.eigenvectors[n], false);
        double dot = 0.0, nm = 0.0, np = 0.0;
        for (std::size_t i = 0; i < g.size(); ++i) {
            if (mapped.masked(i)) continue;
            dot += mapped.value(i) * spt.eigenvectors[n - 1].value(i);
            nm += mapped.value(i) * mapped.value(i);
            np += spt.eigenvectors[n - 1].value(i) * spt.eigenvectors[n - 1].value(i);
        }
        CHECK(std::abs(dot) / std::sqrt(nm * np) > 0.999);
    }
}

TEST_CASE("intertwining relation A H = H-tilde A on eigenvectors") {
    struct Case {
        CatalogEntry entry;
        ParamPoint a;
        Grid grid;
        double window_lo; // singular-wall clearance for the comparison
    };
    std::vector<Case> cases;
    {
        // near the 1/r^2 wall the stencils cannot resolve the eigenvector's
        // r^{l+1} behaviour pointwise; the identity is compared beyond it
        CatalogEntry e = radial_oscillator();
        cases.push_back({e, ParamPoint{{"l", 2.0}}, Grid(1.2e-3, 12.0, 4001, 2000), 0.7});
    }
    {
        CatalogEntry e = poschl_teller();
        cases.push_back({e, ParamPoint{{"alpha", 1.0}, {"lambda", 4.0}},
                         Grid::centered(-10.0, 10.0, 4001), -11.0});
    }
    for (const auto& c : cases) {
        for (const FactorizationPair& pair : c.entry.factorizations) {
            if (pair.order != OperatorOrder::AdaggerA) continue;
            DiscretizedHamiltonian H = discretize(c.entry.potential, c.a, c.grid);
            SampledFunction partner = pair.partner(c.a, c.grid);
            DiscretizedHamiltonian Ht = discretize_samples(partner);
            SpectrumResult sp = eigen_lowest(H, 3);

            // fourth-order first difference keeps the comparison from being
            // dominated by the derivative stencil itself
            SampledFunction W = pair.w.sampled(c.a, c.grid);
            auto apply_A4 = [&](const SampledFunction& f) {
                SampledFunction df = derivative_order4(f);
                SampledFunction out(c.grid);
                for (std::size_t i = 0; i < c.grid.size(); ++i) {
                    if (df.masked(i) || W.masked(i) || f.masked(i))
                        out.set_masked(i);
                    else
                        out.set(i, df.value(i) + W.value(i) * f.value(i));
                }
                return out;
            };
            for (std::size_t n = 0; n < 3; ++n) {
                const SampledFunction& psi = sp.eigenvectors[n];
                SampledFunction lhs = apply_A4(H.apply(psi));
                SampledFunction rhs = Ht.apply(apply_A4(psi));
                double num = 0.0;
                // skip the wall-adjacent rows: A psi need not vanish at a
                // truncation wall, and the Dirichlet stencil sees a zero there
                for (std::size_t i = 2; i + 2 < c.grid.size(); ++i) {
                    if (lhs.masked(i) || rhs.masked(i)) continue;
                    if (c.grid.x(i) < c.window_lo) continue;
                    num += (lhs.value(i) - rhs.value(i)) * (lhs.value(i) - rhs.value(i));
                }
                const double dev = std::sqrt(c.grid.spacing() * num); // psi has unit norm
                INFO(c.entry.potential.id << " pair " << pair.w.description << " level " << n);
                CHECK(dev < 1e-3);
            }
        }
    }
}

TEST_CASE("partners are isospectral up to one low level") {
    SECTION("a potential against itself matches everywhere") {
        ParametricPotential V = line_oscillator();
        Grid g = Grid::centered(-12.0, 12.0, 2001);
        SampledFunction self = V.sampled(ParamPoint{}, g);
        IsospectralReport rep = isospectral_check(V, ParamPoint{}, self, g, 3, 1e-6);
        CHECK(rep.ok);
        CHECK(rep.matched.size() == 3);
        CHECK_FALSE(rep.unmatched_ground.has_value());
    }
    SECTION("Poschl-Teller against its partner drops only the ground level") {
        CatalogEntry e = poschl_teller();
        ParamPoint a{{"alpha", 1.0}, {"lambda", 4.0}};
        SampledFunction partner = e.factorizations[1].partner(a, e.main_grid);
        IsospectralReport rep = isospectral_check(e.potential, a, partner, e.main_grid, 3, 2e-2);
        CHECK(rep.ok);
        REQUIRE(rep.matched.size() == 2);
        CHECK(rep.matched[0].first == Catch::Approx(-4.0).margin(2e-3));
        CHECK(rep.matched[1].first == Catch::Approx(-1.0).margin(2e-3));
        REQUIRE(rep.unmatched_ground.has_value());
        CHECK(*rep.unmatched_ground == Catch::Approx(-9.0).margin(2e-3));
    }
    SECTION("deformed oscillator partner from the regular family member") {
        ParametricPotential V = line_oscillator();
        FactorizationPair p = line_oscillator_pair();
        // anchored at the left edge, F > 0 gives a node-free member
        Grid g(-12.0, 12.0, 3001, 0);
        PartnerFamilyMember m = general_solution(V, p, ParamPoint{}, FamilyConstant::of(2.0), g);
        REQUIRE(m.nodes.empty());
        IsospectralReport rep = isospectral_check(V, ParamPoint{}, m.v_tilde_g, g, 4, 5e-2);
        CHECK(rep.ok);
        REQUIRE(rep.matched.size() == 3);
        CHECK(rep.matched[0].first == Catch::Approx(3.0).margin(5e-3));
        CHECK(rep.matched[1].first == Catch::Approx(5.0).margin(5e-3));
        CHECK(rep.matched[2].first == Catch::Approx(7.0).margin(5e-3));
        REQUIRE(rep.unmatched_ground.has_value());
        CHECK(*rep.unmatched_ground == Catch::Approx(1.0).margin(5e-3));
    }
    SECTION("a masked partner is rejected") {
        ParametricPotential V = line_oscillator();
        Grid g = Grid::centered(-6.0, 6.0, 201);
        SampledFunction holed = V.sampled(ParamPoint{}, g);
        holed.set_masked(100);
        CHECK_THROWS_AS(isospectral_check(V, ParamPoint{}, holed, g, 2, 1e-2), GridError);
    }
    SECTION("more than one unmatched level is a failure report") {
        ParametricPotential V = line_oscillator();
        Grid g = Grid::centered(-12.0, 12.0, 2001);
        SampledFunction far_off = sample(g, [](double x) { return x * x + 10.0; });
        IsospectralReport rep = isospectral_check(V, ParamPoint{}, far_off, g, 3, 1e-2);
        CHECK_FALSE(rep.ok);
        CHECK_FALSE(rep.message.empty());
    }
    SECTION("a spurious low level on the partner side is a failure report") {
        ParametricPotential shifted;
        shifted.id = "shifted";
        shifted.evaluate = [](double x, const ParamPoint&) { return x * x + 10.0; };
        shifted.domain = Interval{};
        Grid g = Grid::centered(-12.0, 12.0, 2001);
        SampledFunction low = sample(g, [](double x) { return x * x; });
        IsospectralReport rep = isospectral_check(shifted, ParamPoint{}, low, g, 3, 1e-2);
        CHECK_FALSE(rep.ok);
        CHECK(rep.message.find("low level") != std::string::npos);
    }
}

TEST_CASE("an unrepresentable candidate is flagged, not thrown") {
    // no closed-form antiderivative and a pole in W: the running integral
    // masks everything past the pole and the candidate cannot qualify
    ParametricPotential V = free_particle();
    FactorizationPair p;
    p.potential_id = "free";
    p.order = OperatorOrder::AdaggerA;
    p.w.evaluate = [](double x, const ParamPoint&) { return 1.0 / (x - 0.5); };
    p.energy = [](const ParamPoint&) { return 0.0; };
    Grid g(0.0, 1.0, 101, 0);
    AnnihilationReport rep = annihilation_check(p, ParamPoint{}, g);
    CHECK(rep.overflow);
    CHECK_FALSE(rep.normalizable);
}
