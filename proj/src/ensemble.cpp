#include "sclt/ensemble.hpp"

#include <cmath>

namespace sclt {

double EntryLaw::draw(Philox& rng) const {
    switch (kind) {
        case LawKind::gaussian: return rng.normal();
        case LawKind::rademacher: return (rng() & 1u) ? 1.0 : -1.0;
        case LawKind::uniform: return std::sqrt(3.0) * (2.0 * rng.uniform() - 1.0);
        case LawKind::custom:
            require(static_cast<bool>(custom_sampler), ErrorCode::invalid_argument,
                    "custom entry law has no sampler");
            return custom_sampler(rng);
    }
    return 0.0;
}

EntryLaw law_from_name(const std::string& name) {
    if (name == "gaussian") return EntryLaw::gaussian();
    if (name == "rademacher") return EntryLaw::rademacher();
    if (name == "uniform") return EntryLaw::uniform();
    throw Error(ErrorCode::config_error, "unknown entry law '" + name + "'");
}

std::string law_name(const EntryLaw& law) {
    switch (law.kind) {
        case LawKind::gaussian: return "gaussian";
        case LawKind::rademacher: return "rademacher";
        case LawKind::uniform: return "uniform";
        case LawKind::custom: return "custom";
    }
    return "custom";
}

double kappa4_of(const EntryLaw& law) {
    switch (law.kind) {
        case LawKind::gaussian: return 0.0;
        case LawKind::rademacher: return -2.0;
        case LawKind::uniform: return -1.2;
        case LawKind::custom:
            require(law.kappa4.has_value(), ErrorCode::invalid_argument,
                    "custom entry law has no declared kappa4");
            return *law.kappa4;
    }
    return 0.0;
}

MatrixXcd standard_gaussian(int n, Symmetry sym, Philox& rng) {
    MatrixXcd G(n, n);
    const double s = 1.0 / std::sqrt(2.0);
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
            if (sym == Symmetry::real) {
                G(i, j) = cplx(rng.normal(), 0.0);
            } else {
                const double a = rng.normal();
                const double b = rng.normal();
                G(i, j) = cplx(s * a, s * b);
            }
        }
    return G;
}

MatrixSample sample_iid(const EnsembleSpec& spec, std::int64_t trial) {
    require(spec.n >= 2, ErrorCode::invalid_argument, "matrix dimension must be at least 2");
    if (spec.law.kind == LawKind::custom)
        require(static_cast<bool>(spec.law.custom_sampler), ErrorCode::invalid_argument,
                "custom entry law has no sampler");
    Philox rng(spec.seed, static_cast<std::uint64_t>(trial), stream_tag::sample);
    const int n = spec.n;
    const double scale = 1.0 / std::sqrt(static_cast<double>(n));
    MatrixSample out{MatrixXcd(n, n), spec, trial};
    const double s = 1.0 / std::sqrt(2.0);
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
            if (spec.symmetry == Symmetry::real) {
                out.data(i, j) = cplx(scale * spec.law.draw(rng), 0.0);
            } else {
                const double a = spec.law.draw(rng);
                const double b = spec.law.draw(rng);
                out.data(i, j) = cplx(scale * s * a, scale * s * b);
            }
        }
    return out;
}

FlowState start_flow(const MatrixSample& X0) {
    return FlowState{X0.data, 0.0, X0.spec.seed, X0.trial_index, 0, X0.spec.symmetry};
}

FlowState ou_evolve(const MatrixSample& X0, double t) {
    require(t >= 0.0, ErrorCode::invalid_argument, "OU time must be nonnegative");
    FlowState st = start_flow(X0);
    if (t == 0.0) return st;
    const int n = X0.spec.n;
    Philox rng(X0.spec.seed, static_cast<std::uint64_t>(X0.trial_index), stream_tag::ou);
    const MatrixXcd G = standard_gaussian(n, X0.spec.symmetry, rng);
    st.X = std::exp(-t / 2.0) * X0.data + std::sqrt(-std::expm1(-t) / n) * G;
    st.t = t;
    return st;
}

OuSplit ou_split(const MatrixSample& X0, double t_f) {
    require(t_f > 0.0, ErrorCode::invalid_argument, "OU split time must be positive");
    const int n = X0.spec.n;
    Philox rng(X0.spec.seed, static_cast<std::uint64_t>(X0.trial_index), stream_tag::ou);
    OuSplit s;
    s.c_tf = -std::expm1(-t_f);
    s.c = s.c_tf / t_f;
    s.X_check = std::exp(-t_f / 2.0) * X0.data;
    s.U = standard_gaussian(n, X0.spec.symmetry, rng) / std::sqrt(static_cast<double>(n));
    return s;
}

FlowState brownian_step(const FlowState& state, double dt, const MatrixXcd* shared_noise) {
    require(dt > 0.0, ErrorCode::invalid_argument, "time step must be positive");
    const int n = static_cast<int>(state.X.rows());
    FlowState next = state;
    next.step_count = state.step_count + 1;
    next.t = state.t + dt;
    const double scale = std::sqrt(dt / n);
    if (shared_noise) {
        require(shared_noise->rows() == n && shared_noise->cols() == n, ErrorCode::dimension_mismatch,
                "shared noise shape does not match the flow state");
        next.X += scale * (*shared_noise);
    } else {
        Philox rng(state.base_seed, static_cast<std::uint64_t>(state.trial),
                   static_cast<std::uint64_t>(next.step_count));
        next.X += scale * standard_gaussian(n, state.symmetry, rng);
    }
    return next;
}

}  // namespace sclt
