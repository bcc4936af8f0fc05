#include "pinnhs/oracle.hpp"

#include <algorithm>
#include <cmath>

namespace pinnhs {

void ToyPlateProblem::validate() const {
    if (w <= 0 || h_height <= 0 || k <= 0 || h_true < 0) {
        throw ConfigError("toy plate dimensions and conductivity must be positive, h non-negative");
    }
    if (t0_c == t_inf_c) throw ConfigError("toy plate needs T0 != T_inf");
}

double toy_exact_temperature(const ToyPlateProblem& p, double x) {
    p.validate();
    if (x < 0 || x > p.w) throw RangeError("x outside the plate");
    return -p.h_true * (p.t0_c - p.t_inf_c) / (p.k + p.h_true * p.w) * x + p.t0_c;
}

double toy_invert_h(const ToyPlateProblem& p, double t_w_c) {
    if (t_w_c <= p.t_inf_c) {
        throw UnphysicalError("T(W) must exceed T_inf for a positive heat transfer coefficient");
    }
    return (p.t0_c - t_w_c) * p.k / (p.w * (t_w_c - p.t_inf_c));
}

namespace {

// Shared assembly for the rig and slab problems. Rows can have different
// heights; columns are uniform with periodic wrap.
struct FdSystem {
    int nx = 0, ny = 0;
    double dx = 0;
    std::vector<double> y_centers, y_heights;
    std::vector<int> region;     // per cell
    std::vector<double> k_cell;  // per cell; 0 marks coolant
    std::vector<int> unknown;    // cell -> unknown index or -1
    std::vector<int> cells;      // unknown -> cell
    std::vector<double> diag;
    std::vector<std::array<int, 4>> nbr;
    std::vector<std::array<double, 4>> coef;  // positive; applied as -coef off-diagonal
    std::vector<double> rhs;
    std::vector<std::pair<int, double>> robin_faces;
    double t_w = 0;
    double flux_in = 0;

    std::size_t cell(int i, int j) const { return static_cast<std::size_t>(j) * nx + i; }

    void apply(const std::vector<double>& x, std::vector<double>& y) const {
        const std::size_t n = diag.size();
        for (std::size_t r = 0; r < n; ++r) {
            double acc = diag[r] * x[r];
            for (int s = 0; s < 4; ++s) {
                const int c = nbr[r][static_cast<std::size_t>(s)];
                if (c >= 0) {
                    acc -= coef[r][static_cast<std::size_t>(s)] * x[static_cast<std::size_t>(c)];
                }
            }
            y[r] = acc;
        }
    }

    void add_neighbor(int row, int col, double c) {
        auto& slots = nbr[static_cast<std::size_t>(row)];
        for (int s = 0; s < 4; ++s) {
            if (slots[static_cast<std::size_t>(s)] < 0) {
                slots[static_cast<std::size_t>(s)] = col;
                coef[static_cast<std::size_t>(row)][static_cast<std::size_t>(s)] = c;
                return;
            }
        }
        throw SolverError("cell has more than four neighbors");
    }

    void couple(int row, int col, double conductance) {
        diag[static_cast<std::size_t>(row)] += conductance;
        diag[static_cast<std::size_t>(col)] += conductance;
        add_neighbor(row, col, conductance);
        add_neighbor(col, row, conductance);
    }

    void robin(int row, double u_times_len) {
        diag[static_cast<std::size_t>(row)] += u_times_len;
        rhs[static_cast<std::size_t>(row)] += u_times_len * t_w;
        robin_faces.emplace_back(row, u_times_len);
    }
};

void assemble_faces(FdSystem& sys, double h_robin) {
    const std::size_t n = sys.cells.size();
    sys.diag.assign(n, 0.0);
    sys.nbr.assign(n, {-1, -1, -1, -1});
    sys.coef.assign(n, {0, 0, 0, 0});
    sys.rhs.assign(n, 0.0);

    for (int j = 0; j < sys.ny; ++j) {
        const double hy = sys.y_heights[static_cast<std::size_t>(j)];
        for (int i = 0; i < sys.nx; ++i) {
            const std::size_t cell = sys.cell(i, j);
            const int row = sys.unknown[cell];
            if (row < 0) continue;
            const double kp = sys.k_cell[cell];

            // +x face (periodic); one visit per face from its left cell
            {
                const int in = (i + 1) % sys.nx;
                const std::size_t nc = sys.cell(in, j);
                const int col = sys.unknown[nc];
                if (col < 0) {
                    sys.robin(row, hy / (1.0 / h_robin + sys.dx / (2.0 * kp)));
                } else {
                    const double kh = 2.0 * kp * sys.k_cell[nc] / (kp + sys.k_cell[nc]);
                    sys.couple(row, col, kh * hy / sys.dx);
                }
            }
            // -x water face (water cells never emit their +x face)
            {
                const int in = (i - 1 + sys.nx) % sys.nx;
                const std::size_t nc = sys.cell(in, j);
                if (sys.unknown[nc] < 0) {
                    sys.robin(row, hy / (1.0 / h_robin + sys.dx / (2.0 * kp)));
                }
            }
            // +y face
            if (j + 1 < sys.ny) {
                const std::size_t nc = sys.cell(i, j + 1);
                const int col = sys.unknown[nc];
                const double hy_n = sys.y_heights[static_cast<std::size_t>(j + 1)];
                if (col < 0) {
                    sys.robin(row, sys.dx / (1.0 / h_robin + hy / (2.0 * kp)));
                } else {
                    const double resistance =
                        hy / (2.0 * kp) + hy_n / (2.0 * sys.k_cell[nc]);
                    sys.couple(row, col, sys.dx / resistance);
                }
            }
            // -y water face
            if (j - 1 >= 0) {
                const std::size_t nc = sys.cell(i, j - 1);
                if (sys.unknown[nc] < 0) {
                    sys.robin(row, sys.dx / (1.0 / h_robin + hy / (2.0 * kp)));
                }
            }
        }
    }
}

void solve_system(FdSystem& sys, const FdConfig& cfg, FdSolution& out) {
    const std::size_t n = sys.diag.size();
    std::vector<double> x(n, sys.t_w);
    double bnorm = 0;
    for (double b : sys.rhs) bnorm += b * b;
    bnorm = std::sqrt(bnorm);
    if (bnorm == 0) bnorm = 1;

    int iters = 0;
    double rel = 0;
    if (cfg.solver == FdConfig::Solver::kJacobi) {
        std::vector<double> ax(n), xn(n);
        const double omega = 0.8;
        for (iters = 0; iters < cfg.max_iter; ++iters) {
            sys.apply(x, ax);
            double rn = 0;
            for (std::size_t i = 0; i < n; ++i) {
                const double r = sys.rhs[i] - ax[i];
                rn += r * r;
                xn[i] = x[i] + omega * r / sys.diag[i];
            }
            x.swap(xn);
            rel = std::sqrt(rn) / bnorm;
            if (rel < cfg.tol) break;
        }
    } else {
        // Jacobi-preconditioned conjugate gradients
        std::vector<double> r(n), z(n), p(n), ap(n);
        sys.apply(x, ap);
        for (std::size_t i = 0; i < n; ++i) r[i] = sys.rhs[i] - ap[i];
        for (std::size_t i = 0; i < n; ++i) z[i] = r[i] / sys.diag[i];
        p = z;
        double rz = 0;
        for (std::size_t i = 0; i < n; ++i) rz += r[i] * z[i];
        for (iters = 0; iters < cfg.max_iter; ++iters) {
            double rn = 0;
            for (std::size_t i = 0; i < n; ++i) rn += r[i] * r[i];
            rel = std::sqrt(rn) / bnorm;
            if (rel < cfg.tol) break;
            sys.apply(p, ap);
            double pap = 0;
            for (std::size_t i = 0; i < n; ++i) pap += p[i] * ap[i];
            if (pap <= 0) throw SolverError("system lost positive definiteness");
            const double alpha = rz / pap;
            for (std::size_t i = 0; i < n; ++i) {
                x[i] += alpha * p[i];
                r[i] -= alpha * ap[i];
            }
            for (std::size_t i = 0; i < n; ++i) z[i] = r[i] / sys.diag[i];
            double rz_new = 0;
            for (std::size_t i = 0; i < n; ++i) rz_new += r[i] * z[i];
            const double beta = rz_new / rz;
            rz = rz_new;
            for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
        }
    }
    if (rel >= cfg.tol) {
        throw SolverError("FD solver did not reach tolerance: residual " + std::to_string(rel) +
                          " after " + std::to_string(iters) + " iterations");
    }

    out.nx = sys.nx;
    out.ny = sys.ny;
    out.dx = sys.dx;
    out.y_centers = sys.y_centers;
    out.y_heights = sys.y_heights;
    out.iterations = iters;
    out.residual_norm = rel;
    out.region = sys.region;
    out.temp_k.assign(static_cast<std::size_t>(sys.nx) * sys.ny, sys.t_w);
    for (std::size_t u = 0; u < sys.cells.size(); ++u) {
        out.temp_k[static_cast<std::size_t>(sys.cells[u])] = x[u];
    }
    out.flux_in_w_per_m = sys.flux_in;
    double robin_out = 0;
    for (const auto& [u, ul] : sys.robin_faces) {
        robin_out += ul * (x[static_cast<std::size_t>(u)] - sys.t_w);
    }
    out.robin_out_w_per_m = robin_out;
}

}  // namespace

FdSolution fd_solve(const RigGeometry& geom, const CaseConfig& c, double h, const FdConfig& cfg) {
    validate_geometry(geom);
    if (h <= 0) throw ConfigError("FD solve needs a positive h");
    if (cfg.nx < 8 || cfg.ny < 15) throw ConfigError("FD grid too coarse for the five-layer rig");

    FdSystem sys;
    sys.nx = cfg.nx;
    sys.dx = geom.x_n / cfg.nx;
    sys.t_w = c.t_w_k();
    const double q_pp = c.flux_per_area(geom);
    const double y_n = geom.y_n();

    // allocate rows per layer: proportional to thickness, at least 3 each
    std::vector<int> layer_rows(5);
    std::vector<int> row_layer;
    for (int li = 0; li < 5; ++li) {
        const LayerSpec& L = geom.layer(li);
        const double frac = (L.y_top - L.y_bottom) / y_n;
        layer_rows[static_cast<std::size_t>(li)] =
            std::max(3, static_cast<int>(std::lround(cfg.ny * frac)));
    }
    for (int li = 0; li < 5; ++li) {
        const LayerSpec& L = geom.layer(li);
        const int n = layer_rows[static_cast<std::size_t>(li)];
        const double hcell = (L.y_top - L.y_bottom) / n;
        for (int r = 0; r < n; ++r) {
            sys.y_centers.push_back(L.y_bottom + (r + 0.5) * hcell);
            sys.y_heights.push_back(hcell);
            row_layer.push_back(li);
        }
    }
    sys.ny = static_cast<int>(sys.y_centers.size());

    const std::size_t ncell = static_cast<std::size_t>(sys.nx) * sys.ny;
    sys.region.resize(ncell);
    sys.k_cell.resize(ncell);
    sys.unknown.assign(ncell, -1);
    for (int j = 0; j < sys.ny; ++j) {
        const double yc = sys.y_centers[static_cast<std::size_t>(j)];
        for (int i = 0; i < sys.nx; ++i) {
            const Point2 pm{(i + 0.5) * sys.dx, yc};
            int region = row_layer[static_cast<std::size_t>(j)];
            double kc = geom.layer(region).k;
            for (int pid = 1; pid <= 6; ++pid) {
                const PipeSpec& P = geom.pipe(pid);
                const double ddx = pm.x - P.x_c;
                const double ddy = pm.y - P.y_c;
                const double r2 = ddx * ddx + ddy * ddy;
                if (r2 < P.r_inner * P.r_inner) {
                    region = -1;
                    kc = 0.0;
                    break;
                }
                if (r2 <= P.r_outer * P.r_outer) {
                    region = 5;
                    kc = P.k_pipe;
                    break;
                }
            }
            const std::size_t cell = sys.cell(i, j);
            sys.region[cell] = region;
            sys.k_cell[cell] = kc;
            if (region >= 0) {
                sys.unknown[cell] = static_cast<int>(sys.cells.size());
                sys.cells.push_back(static_cast<int>(cell));
            }
        }
    }

    assemble_faces(sys, h);

    // top-face flux on the heated footprint
    for (int i = 0; i < sys.nx; ++i) {
        const double xc = (i + 0.5) * sys.dx;
        if (xc < geom.x_a || xc > geom.x_b) continue;
        const int row = sys.unknown[sys.cell(i, sys.ny - 1)];
        if (row < 0) continue;
        sys.rhs[static_cast<std::size_t>(row)] += q_pp * sys.dx;
        sys.flux_in += q_pp * sys.dx;
    }

    FdSolution out;
    out.x_extent = geom.x_n;
    out.y_extent = y_n;
    solve_system(sys, cfg, out);
    return out;
}

FdSolution fd_solve_slab(double width, double height, double k, double q_pp, double h,
                         double t_w_k, const FdConfig& cfg) {
    if (width <= 0 || height <= 0 || k <= 0 || h <= 0) {
        throw ConfigError("slab parameters must be positive");
    }
    if (cfg.nx < 2 || cfg.ny < 2) throw ConfigError("slab grid too coarse");
    FdSystem sys;
    sys.nx = cfg.nx;
    sys.ny = cfg.ny;
    sys.dx = width / cfg.nx;
    sys.t_w = t_w_k;
    const double hy = height / cfg.ny;
    for (int j = 0; j < cfg.ny; ++j) {
        sys.y_centers.push_back((j + 0.5) * hy);
        sys.y_heights.push_back(hy);
    }
    const std::size_t ncell = static_cast<std::size_t>(cfg.nx) * cfg.ny;
    sys.region.assign(ncell, 0);
    sys.k_cell.assign(ncell, k);
    sys.unknown.resize(ncell);
    for (std::size_t ci = 0; ci < ncell; ++ci) {
        sys.unknown[ci] = static_cast<int>(ci);
        sys.cells.push_back(static_cast<int>(ci));
    }

    assemble_faces(sys, h);

    for (int i = 0; i < cfg.nx; ++i) {
        // flux in through the whole top face
        const int top = sys.unknown[sys.cell(i, cfg.ny - 1)];
        sys.rhs[static_cast<std::size_t>(top)] += q_pp * sys.dx;
        sys.flux_in += q_pp * sys.dx;
        // Robin out through the whole bottom face
        const int bot = sys.unknown[sys.cell(i, 0)];
        sys.robin(bot, sys.dx / (1.0 / h + hy / (2.0 * k)));
    }

    FdSolution out;
    out.x_extent = width;
    out.y_extent = height;
    solve_system(sys, cfg, out);
    return out;
}

double fd_probe(const FdSolution& sol, Point2 p_m) {
    if (p_m.x < 0 || p_m.x > sol.x_extent || p_m.y < 0 || p_m.y > sol.y_extent) {
        throw RangeError("probe outside the FD grid");
    }
    const double gx = p_m.x / sol.dx - 0.5;
    const int i0 = std::clamp(static_cast<int>(std::floor(gx)), 0, sol.nx - 1);
    const int i1 = std::min(i0 + 1, sol.nx - 1);
    const double fx = std::clamp(gx - i0, 0.0, 1.0);

    // locate the y interval between cell centers
    const auto& yc = sol.y_centers;
    int j0 = static_cast<int>(std::upper_bound(yc.begin(), yc.end(), p_m.y) - yc.begin()) - 1;
    j0 = std::clamp(j0, 0, sol.ny - 1);
    const int j1 = std::min(j0 + 1, sol.ny - 1);
    const double span = yc[static_cast<std::size_t>(j1)] - yc[static_cast<std::size_t>(j0)];
    const double fy = span > 0 ? std::clamp((p_m.y - yc[static_cast<std::size_t>(j0)]) / span, 0.0, 1.0) : 0.0;

    const double t00 = sol.at(i0, j0);
    const double t10 = sol.at(i1, j0);
    const double t01 = sol.at(i0, j1);
    const double t11 = sol.at(i1, j1);
    return (1 - fx) * (1 - fy) * t00 + fx * (1 - fy) * t10 + (1 - fx) * fy * t01 + fx * fy * t11;
}

}  // namespace pinnhs
