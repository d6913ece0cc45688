#pragma once

#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "alex/mesh.hpp"
#include "alex/pl_function.hpp"

namespace alex {

struct Atom {
    Vec2 position;
    double mass = 0.0;
};

/// det D^2 u = f + sum a_i delta_{P_i} in the polygon, u = phi on its boundary.
struct DirichletProblem {
    ConvexPolygon domain;
    std::function<double(const Vec2&)> density;  ///< empty: `density_constant`
    double density_constant = 1.0;
    std::vector<Atom> atoms;
    std::function<double(const Vec2&)> boundary_data;
    double h = 0.1;
    /// Uses uniform_mesh(domain, h, atom positions) when empty.
    std::optional<Mesh> mesh;

    double density_at(const Vec2& x) const;
};

enum class SolveMethod {
    kAuto,      ///< Newton when every target is positive, node lifting otherwise
    kNewton,    ///< damped Newton on the node-mass equations
    kNodeLift,  ///< Gauss-Seidel sweeps lowering one node at a time
};

struct SolveOptions {
    SolveMethod method = SolveMethod::kAuto;
    double tol_scale = 1.0;
    int max_newton_steps = 200;
    int max_sweeps = 100000;
    /// Interior start values (boundary entries are ignored). Defaults to the
    /// convex envelope of the boundary data.
    std::optional<std::vector<double>> initial;
    /// Called after every sweep / Newton step with the current node values.
    std::function<void(const std::vector<double>&)> observer;
};

struct AtomSnap {
    int node = -1;
    double distance = 0.0;
    double mass = 0.0;
};

struct SolveReport {
    std::string method;
    int iterations = 0;
    int sweeps = 0;
    int newton_steps = 0;
    double max_residual = 0.0;
    double tolerance = 0.0;
    double boundary_mismatch = 0.0;
    int sandwich_violations = 0;
    double wall_seconds = 0.0;
    double h = 0.0;
    bool converged = false;
    std::vector<AtomSnap> snaps;
};

class ConvergenceError : public std::runtime_error {
public:
    ConvergenceError(const std::string& what, SolveReport report)
        : std::runtime_error(what), report_(std::move(report)) {}
    const SolveReport& report() const { return report_; }

private:
    SolveReport report_;
};

struct DirichletSolution {
    PLConvexFunction u;
    SolveReport report;
    Mesh mesh;
    std::vector<double> targets;  ///< per node, 0 on the boundary
};

/// Per-node target masses: the integral of f over the node's Voronoi cell
/// plus the atoms snapped to it.
std::vector<double> target_masses(const Mesh& mesh, const DirichletProblem& p, std::vector<AtomSnap>* snaps = nullptr);

/// Throws ConvergenceError when the iteration cap is reached and
/// std::invalid_argument for atoms outside the domain.
DirichletSolution solve_dirichlet(const DirichletProblem& p, const SolveOptions& opt = {});

/// Largest |mass - target| over interior nodes of a PL function on the mesh.
double max_mass_residual(const PLConvexFunction& u, const std::vector<double>& targets);

}  // namespace alex
