#include "nvtwin/system.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace nvtwin {

Isotope parse_isotope(const std::string& s) {
    if (s == "N14" || s == "14") return Isotope::N14;
    if (s == "N15" || s == "15") return Isotope::N15;
    if (s == "none" || s == "None" || s == "0") return Isotope::None;
    throw ValidationError("invalid isotope '" + s + "' (expected N14, N15 or none)");
}

std::string to_string(Isotope iso) {
    switch (iso) {
        case Isotope::N14: return "N14";
        case Isotope::N15: return "N15";
        default: return "none";
    }
}

IsotopeConstants isotope_constants(Isotope iso) {
    switch (iso) {
        case Isotope::N14: return {-2.14, -2.70, -4.316e-3, -5.01, 1.0};
        case Isotope::N15: return {3.03, 3.65, 3.077e-3, 0.0, 0.5};
        default: return {};
    }
}

Eigen::Vector3d NVParams::field() const {
    return B0 * Eigen::Vector3d(std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi), std::cos(theta));
}

void NVParams::validate() const {
    if (!(B0 >= 0.0) || !std::isfinite(B0)) throw ValidationError("B0 must be >= 0");
    if (!(n0 >= 0.0 && n0 <= 1.0)) throw ValidationError("n0 must lie in [0, 1]");
    if (temperature && !(*temperature > 0.0)) throw ValidationError("temperature must be > 0");
    if (!std::isfinite(theta) || !std::isfinite(phi)) throw ValidationError("field angles must be finite");
}

Labels spin_labels(double j) {
    int d = static_cast<int>(std::lround(2 * j)) + 1;
    bool half = (d % 2) == 0;
    Labels out;
    for (int k = 0; k < d; ++k) {
        double m = j - k;
        if (half) {
            int num = static_cast<int>(std::lround(2 * m));
            out.push_back((num > 0 ? "+" : "") + std::to_string(num) + "/2");
        } else {
            int mi = static_cast<int>(std::lround(m));
            out.push_back(mi > 0 ? "+" + std::to_string(mi) : std::to_string(mi));
        }
    }
    return out;
}

namespace {

std::vector<int> digits_of(int idx, const Dims& d) {
    std::vector<int> out(d.size());
    for (int i = static_cast<int>(d.size()) - 1; i >= 0; --i) {
        out[i] = idx % d.factors[i];
        idx /= d.factors[i];
    }
    return out;
}

struct SortedEigen {
    std::vector<double> E;            // raw eigenvalues, sorted
    std::vector<int> dominant;        // dominant product-basis index per level
    Mat V;
};

SortedEigen sorted_eigen(const Operator& H0) {
    EigenDecomp e = eig_hermitian(H0);
    int n = static_cast<int>(e.values.size());
    std::vector<int> dom(n);
    for (int k = 0; k < n; ++k) {
        Eigen::Index r;
        e.vectors.col(k).cwiseAbs2().maxCoeff(&r);
        dom[k] = static_cast<int>(r);
    }
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    // eigenvalues arrive ascending; reorder only inside clusters of ties
    int start = 0;
    for (int k = 1; k <= n; ++k) {
        if (k == n || e.values(k) - e.values(k - 1) > 1e-9 * std::max(1.0, std::abs(e.values(k)))) {
            std::stable_sort(order.begin() + start, order.begin() + k, [&](int a, int b) { return dom[a] < dom[b]; });
            start = k;
        }
    }
    SortedEigen s;
    s.V.resize(n, n);
    for (int k = 0; k < n; ++k) {
        s.E.push_back(e.values(order[k]));
        s.dominant.push_back(dom[order[k]]);
        s.V.col(k) = e.vectors.col(order[k]);
    }
    return s;
}

int factor_of_role(const QuantumSystem& sys, const std::string& role) {
    for (std::size_t i = 0; i < sys.roles.size(); ++i)
        if (sys.roles[i] == role) return static_cast<int>(i);
    return -1;
}

int label_index(const Labels& ls, const std::string& l) {
    auto it = std::find(ls.begin(), ls.end(), l);
    return it == ls.end() ? -1 : static_cast<int>(it - ls.begin());
}

// Hard-pulse and nuclear transition frequencies from manifold-averaged levels.
void compute_drive_freqs(QuantumSystem& sys) {
    sys.mw_freqs.clear();
    sys.rf_freqs.clear();
    int ef = factor_of_role(sys, "electron");
    if (ef < 0) return;
    SortedEigen se = sorted_eigen(sys.H0);
    double e0 = se.E.front();
    auto mean_where = [&](auto pred) {
        double s = 0;
        int c = 0;
        for (std::size_t k = 0; k < se.E.size(); ++k) {
            auto dg = digits_of(se.dominant[k], sys.dims);
            if (pred(dg)) {
                s += se.E[k] - e0;
                ++c;
            }
        }
        return c ? std::optional<double>(s / c) : std::nullopt;
    };
    const Labels& el = sys.labels[ef];
    int i0 = label_index(el, "0"), im = label_index(el, "-1"), ip = label_index(el, "+1");
    auto m0 = mean_where([&](const std::vector<int>& d) { return d[ef] == i0; });
    for (int idx : {im, ip}) {
        if (idx < 0 || i0 < 0) continue;
        auto m1 = mean_where([&](const std::vector<int>& d) { return d[ef] == idx; });
        if (m0 && m1) sys.mw_freqs.push_back(std::abs(*m1 - *m0));
    }
    int nf = factor_of_role(sys, "nitrogen");
    if (nf < 0) {
        for (std::size_t i = 0; i < sys.roles.size(); ++i)
            if (static_cast<int>(i) != ef) {
                nf = static_cast<int>(i);
                break;
            }
    }
    if (nf < 0) return;
    const Labels& nl = sys.labels[nf];
    for (int e : {i0, im, ip}) {
        if (e < 0) continue;
        for (std::size_t a = 0; a + 1 < nl.size(); ++a) {
            auto ma = mean_where([&](const std::vector<int>& d) { return d[ef] == e && d[nf] == static_cast<int>(a); });
            auto mb = mean_where([&](const std::vector<int>& d) { return d[ef] == e && d[nf] == static_cast<int>(a + 1); });
            if (ma && mb) sys.rf_freqs.push_back(std::abs(*ma - *mb));
        }
    }
}

Mat thermal_nuclear(const Mat& H0, int dn, int e_index, double T) {
    Mat block = H0.block(e_index * dn, e_index * dn, dn, dn);
    EigenDecomp e = eig_hermitian(block);
    double emin = e.values.minCoeff();
    Mat rho = Mat::Zero(dn, dn);
    double z = 0;
    for (int k = 0; k < dn; ++k) {
        double w = std::exp(-(e.values(k) - emin) * 1e6 * constants::h_over_kB / T);
        rho += w * e.vectors.col(k) * e.vectors.col(k).adjoint();
        z += w;
    }
    return rho / z;
}

}  // namespace

std::vector<double> energy_levels_of(const Operator& H0) {
    SortedEigen s = sorted_eigen(H0);
    std::vector<double> out;
    for (double e : s.E) out.push_back(e - s.E.front());
    return out;
}

void refresh_levels(QuantumSystem& sys) { sys.energy_levels = energy_levels_of(sys.H0); }

QuantumSystem build_nv(const NVParams& p) {
    p.validate();
    IsotopeConstants c = isotope_constants(p.isotope);
    Eigen::Vector3d B = p.field();
    SpinOps S = spin_matrices(1.0);
    QuantumSystem sys;

    Mat e_state;
    if (p.n0 >= 1.0) {
        e_state = Mat::Zero(3, 3);
        e_state(1, 1) = 1.0;
    } else {
        Vec d(3);
        d << (1 - p.n0) / 2, p.n0, (1 - p.n0) / 2;
        e_state = d.asDiagonal();
    }

    if (p.isotope == Isotope::None) {
        sys.dims = Dims{3};
        Mat h = constants::D * S.z.data * S.z.data -
                constants::gamma_e * (B(0) * S.x.data + B(1) * S.y.data + B(2) * S.z.data);
        sys.H0 = Operator(h, sys.dims);
        sys.rho0 = QuantumState::density(e_state, sys.dims);
        Mat f = Mat::Zero(3, 3);
        f(1, 1) = 1.0;
        sys.observables["fluorescence"] = Operator(f, sys.dims);
        sys.mw_h1 = std::sqrt(2.0) * S.x;
        sys.rf_h1 = zeros(sys.dims);
        sys.labels = {spin_labels(1.0)};
        sys.roles = {"electron"};
    } else {
        SpinOps I = spin_matrices(c.spin);
        int dn = I.z.n();
        sys.dims = Dims{3, dn};
        Operator Ie = identity(3), In = identity(dn);
        Operator h = constants::D * tensor(S.z * S.z, In) -
                     constants::gamma_e * tensor(B(0) * S.x + B(1) * S.y + B(2) * S.z, In) +
                     c.a_par * tensor(S.z, I.z) + c.a_perp * (tensor(S.x, I.x) + tensor(S.y, I.y)) -
                     c.gamma_n * tensor(Ie, B(0) * I.x + B(1) * I.y + B(2) * I.z) + c.Q * tensor(Ie, I.z * I.z);
        sys.H0 = h;
        Mat nuc = p.temperature ? thermal_nuclear(h.data, dn, 1, *p.temperature) : Mat(Mat::Identity(dn, dn) / dn);
        sys.rho0 = QuantumState::density(tensor(Operator(e_state, Dims{3}), Operator(nuc, Dims{dn})).data, sys.dims);
        Mat f = Mat::Zero(3, 3);
        f(1, 1) = 1.0;
        sys.observables["fluorescence"] = tensor(Operator(f, Dims{3}), In);
        sys.mw_h1 = tensor(std::sqrt(2.0) * S.x, In);
        double scale = dn == 2 ? 2.0 : std::sqrt(2.0);
        sys.rf_h1 = tensor(Ie, scale * I.x);
        sys.labels = {spin_labels(1.0), spin_labels(c.spin)};
        sys.roles = {"electron", "nitrogen"};
    }
    refresh_levels(sys);
    compute_drive_freqs(sys);
    return sys;
}

Operator hyperfine_h2(const Eigen::Matrix3d& A, double spin_c, const Eigen::Vector3d& B0_vec, double gamma_c,
                      const Dims& sys_dims) {
    if ((A - A.transpose()).cwiseAbs().maxCoeff() > 1e-12) throw ValidationError("hyperfine tensor must be symmetric");
    if (sys_dims.factors.empty() || sys_dims.factors[0] != 3) throw ValidationError("hyperfine_h2 expects the electron on factor 0");
    SpinOps S = spin_matrices(1.0);
    SpinOps I = spin_matrices(spin_c);
    int dc = I.z.n();
    int mid = sys_dims.total() / 3;
    Operator Imid = identity(mid);
    const Operator* s[3] = {&S.x, &S.y, &S.z};
    const Operator* ic[3] = {&I.x, &I.y, &I.z};
    Dims out = concat(sys_dims, Dims{dc});
    Mat h = Mat::Zero(out.total(), out.total());
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            if (A(i, j) != 0.0) h += A(i, j) * tensor({*s[i], Imid, *ic[j]}).data;
    Mat zee = B0_vec(0) * I.x.data + B0_vec(1) * I.y.data + B0_vec(2) * I.z.data;
    h -= gamma_c * tensor({identity(3), Imid, Operator(zee, Dims{dc})}).data;
    return {h, out};
}

QuantumSystem add_spin(const QuantumSystem& sys, const Operator& H2, int new_dim) {
    if (new_dim < 2) throw ValidationError("new_dim must be >= 2");
    Dims nd = concat(sys.dims, Dims{new_dim});
    if (!(H2.dims.total() == nd.total())) throw ValidationError("H2 dims do not match enlarged system " + to_string(nd));
    if (!H2.is_hermitian(1e-10)) throw ValidationError("H2 must be Hermitian");
    Operator In = identity(new_dim);
    auto ext = [&](const Operator& o) {
        Operator r = tensor(o, In);
        r.dims = nd;
        return r;
    };
    QuantumSystem out;
    out.dims = nd;
    out.H0 = ext(sys.H0) + Operator(H2.data, nd);
    if (sys.rho0.is_ket()) {
        Mat rho = tensor(Operator(sys.rho0.as_density(), sys.dims), (1.0 / new_dim) * In).data;
        out.rho0 = QuantumState::density(rho, nd);
    } else {
        out.rho0 = QuantumState::density(tensor(Operator(sys.rho0.data, sys.dims), (1.0 / new_dim) * In).data, nd);
    }
    for (const auto& [k, o] : sys.observables) out.observables[k] = ext(o);
    for (const auto& c : sys.c_ops) out.c_ops.push_back({ext(c.c_op), c.rate});
    out.mw_h1 = ext(sys.mw_h1);
    out.rf_h1 = ext(sys.rf_h1);
    out.labels = sys.labels;
    out.labels.push_back(spin_labels((new_dim - 1) / 2.0));
    out.roles = sys.roles;
    out.roles.push_back("spin");
    refresh_levels(out);
    compute_drive_freqs(out);
    return out;
}

QuantumSystem truncate(const QuantumSystem& sys, const std::vector<Labels>& keep) {
    if (keep.size() != sys.dims.size()) throw ValidationError("truncate needs one keep list per factor");
    std::vector<std::vector<int>> kidx(keep.size());
    std::vector<int> nd;
    for (std::size_t f = 0; f < keep.size(); ++f) {
        if (keep[f].empty()) throw ValidationError("truncate: empty keep list for factor " + std::to_string(f));
        std::vector<bool> sel(sys.labels[f].size(), false);
        for (const auto& l : keep[f]) {
            int i = label_index(sys.labels[f], l);
            if (i < 0) throw ValidationError("truncate: label '" + l + "' not found on factor " + std::to_string(f));
            sel[i] = true;
        }
        for (std::size_t i = 0; i < sel.size(); ++i)
            if (sel[i]) kidx[f].push_back(static_cast<int>(i));
        nd.push_back(static_cast<int>(kidx[f].size()));
    }
    Dims out_dims(nd);
    int n = sys.dims.total(), m = out_dims.total();
    Mat P = Mat::Zero(n, m);
    int col = 0;
    for (int i = 0; i < n; ++i) {
        auto d = digits_of(i, sys.dims);
        bool ok = true;
        for (std::size_t f = 0; f < d.size() && ok; ++f)
            ok = std::find(kidx[f].begin(), kidx[f].end(), d[f]) != kidx[f].end();
        if (ok) P(i, col++) = 1.0;
    }
    auto proj = [&](const Operator& o) { return Operator(P.adjoint() * o.data * P, out_dims); };
    QuantumSystem out;
    out.dims = out_dims;
    out.H0 = proj(sys.H0);
    if (sys.rho0.is_ket()) {
        Vec v = P.adjoint() * sys.rho0.data;
        if (v.norm() < 1e-12) throw ValidationError("truncate: initial state has no weight on the kept subspace");
        out.rho0 = QuantumState::ket(v / v.norm(), out_dims);
    } else {
        Mat r = P.adjoint() * sys.rho0.data * P;
        double tr = r.trace().real();
        if (tr < 1e-12) throw ValidationError("truncate: initial state has no weight on the kept subspace");
        out.rho0 = QuantumState::density(r / tr, out_dims);
    }
    for (const auto& [k, o] : sys.observables) out.observables[k] = proj(o);
    for (const auto& c : sys.c_ops) out.c_ops.push_back({proj(c.c_op), c.rate});
    out.mw_h1 = proj(sys.mw_h1);
    out.rf_h1 = proj(sys.rf_h1);
    // transition frequencies describe the physical centre, not the retained subspace
    out.mw_freqs = sys.mw_freqs;
    out.rf_freqs = sys.rf_freqs;
    out.roles = sys.roles;
    for (std::size_t f = 0; f < keep.size(); ++f) {
        Labels l;
        for (int i : kidx[f]) l.push_back(sys.labels[f][i]);
        out.labels.push_back(l);
    }
    refresh_levels(out);
    return out;
}

QuantumSystem compose(const QuantumSystem& a, const QuantumSystem& b) {
    Dims nd = concat(a.dims, b.dims);
    Operator Ia = identity(a.dims.total()), Ib = identity(b.dims.total());
    auto left = [&](const Operator& o) {
        Operator r = tensor(o, Ib);
        r.dims = nd;
        return r;
    };
    auto right = [&](const Operator& o) {
        Operator r = tensor(Ia, o);
        r.dims = nd;
        return r;
    };
    QuantumSystem out;
    out.dims = nd;
    out.H0 = left(a.H0) + right(b.H0);
    if (a.rho0.is_ket() && b.rho0.is_ket()) {
        Vec k(nd.total());
        for (int i = 0; i < a.dims.total(); ++i)
            for (int j = 0; j < b.dims.total(); ++j) k(i * b.dims.total() + j) = a.rho0.data(i, 0) * b.rho0.data(j, 0);
        out.rho0 = QuantumState::ket(k, nd);
    } else {
        out.rho0 = QuantumState::density(
            tensor(Operator(a.rho0.as_density(), a.dims), Operator(b.rho0.as_density(), b.dims)).data, nd);
    }
    for (const auto& [k, o] : a.observables) out.observables["0." + k] = left(o);
    for (const auto& [k, o] : b.observables) out.observables["1." + k] = right(o);
    for (const auto& c : a.c_ops) out.c_ops.push_back({left(c.c_op), c.rate});
    for (const auto& c : b.c_ops) out.c_ops.push_back({right(c.c_op), c.rate});
    out.mw_h1 = left(a.mw_h1) + right(b.mw_h1);
    out.rf_h1 = left(a.rf_h1) + right(b.rf_h1);
    out.mw_freqs = a.mw_freqs;
    out.mw_freqs.insert(out.mw_freqs.end(), b.mw_freqs.begin(), b.mw_freqs.end());
    out.rf_freqs = a.rf_freqs;
    out.rf_freqs.insert(out.rf_freqs.end(), b.rf_freqs.begin(), b.rf_freqs.end());
    out.labels = a.labels;
    out.labels.insert(out.labels.end(), b.labels.begin(), b.labels.end());
    out.roles = a.roles;
    out.roles.insert(out.roles.end(), b.roles.begin(), b.roles.end());
    refresh_levels(out);
    return out;
}

QuantumSystem set_initial_state(const QuantumSystem& sys, const QuantumState& s) {
    if (s.n() != sys.dims.total()) throw ValidationError("initial state dims do not match system " + to_string(sys.dims));
    s.validate(1e-10);
    QuantumSystem out = sys;
    out.rho0 = s;
    out.rho0.dims = sys.dims;
    return out;
}

int basis_index(const QuantumSystem& sys, const Labels& l) {
    if (l.size() != sys.dims.size()) throw ValidationError("need one label per factor");
    int idx = 0;
    for (std::size_t f = 0; f < l.size(); ++f) {
        int i = label_index(sys.labels[f], l[f]);
        if (i < 0) throw ValidationError("label '" + l[f] + "' not found on factor " + std::to_string(f));
        idx = idx * sys.dims.factors[f] + i;
    }
    return idx;
}

Vec product_ket(const QuantumSystem& sys, const Labels& l) { return basis_ket(sys.dims.total(), basis_index(sys, l)); }

double level_energy(const QuantumSystem& sys, const Labels& l) {
    int b = basis_index(sys, l);
    SortedEigen se = sorted_eigen(sys.H0);
    Eigen::Index k;
    se.V.row(b).cwiseAbs2().maxCoeff(&k);
    return se.E[k] - se.E.front();
}

double transition_frequency(const QuantumSystem& sys, const Labels& a, const Labels& b) {
    return std::abs(level_energy(sys, b) - level_energy(sys, a));
}

Operator factor_projector(const QuantumSystem& sys, std::size_t factor, const std::string& label) {
    if (factor >= sys.dims.size()) throw ValidationError("factor index out of range");
    int i = label_index(sys.labels[factor], label);
    if (i < 0) throw ValidationError("label '" + label + "' not found");
    int d = sys.dims.factors[factor];
    Mat p = Mat::Zero(d, d);
    p(i, i) = 1.0;
    return embed(Operator(p, Dims{d}), factor, sys.dims);
}

}  // namespace nvtwin
