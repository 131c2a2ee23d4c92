#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>

#include "sclt/common.hpp"
#include "sclt/rng.hpp"

namespace sclt {

enum class LawKind { gaussian, rademacher, uniform, custom };

struct EntryLaw {
    LawKind kind = LawKind::gaussian;
    // Unit-variance, mean-zero sampler; only used for LawKind::custom.
    std::function<double(Philox&)> custom_sampler;
    // Declared fourth cumulant; required for custom laws.
    std::optional<double> kappa4;

    static EntryLaw gaussian() { return {LawKind::gaussian, {}, 0.0}; }
    static EntryLaw rademacher() { return {LawKind::rademacher, {}, -2.0}; }
    static EntryLaw uniform() { return {LawKind::uniform, {}, -1.2}; }
    static EntryLaw custom(std::function<double(Philox&)> sampler, std::optional<double> k4) {
        return {LawKind::custom, std::move(sampler), k4};
    }

    // Unnormalized draw chi with E chi = 0, E chi^2 = 1.
    double draw(Philox& rng) const;
};

EntryLaw law_from_name(const std::string& name);
std::string law_name(const EntryLaw& law);

double kappa4_of(const EntryLaw& law);

enum class Symmetry { real, complex };

struct EnsembleSpec {
    Symmetry symmetry = Symmetry::real;
    EntryLaw law = EntryLaw::gaussian();
    int n = 2;
    std::uint64_t seed = 0;
};

struct MatrixSample {
    MatrixXcd data;
    EnsembleSpec spec;
    std::int64_t trial_index = 0;

    bool is_real() const { return spec.symmetry == Symmetry::real; }
    // Real part as a real matrix; exact for the real class.
    MatrixXd real_data() const { return data.real(); }
};

MatrixSample sample_iid(const EnsembleSpec& spec, std::int64_t trial);

// n x n Gaussian matrix with unit-variance entries (real), or (g1 + i g2)/sqrt(2).
MatrixXcd standard_gaussian(int n, Symmetry sym, Philox& rng);

struct FlowState {
    MatrixXcd X;
    double t = 0.0;
    std::uint64_t base_seed = 0;
    std::int64_t trial = 0;
    std::int64_t step_count = 0;
    Symmetry symmetry = Symmetry::real;
};

FlowState start_flow(const MatrixSample& X0);

// Exact-in-distribution OU transition X_t = e^{-t/2} X0 + sqrt((1 - e^{-t})/n) G.
FlowState ou_evolve(const MatrixSample& X0, double t);

// Split of the OU endpoint into a deterministic part and a Gaussian part:
// X_hat(t_f) = X_check + sqrt(c t_f) U, with c t_f = 1 - e^{-t_f} and U an
// independent Ginibre matrix of the same symmetry class (entry variance 1/n).
struct OuSplit {
    MatrixXcd X_check;
    MatrixXcd U;
    double c_tf = 0.0;
    double c = 0.0;
    MatrixXcd endpoint() const { return X_check + std::sqrt(c_tf) * U; }
};

OuSplit ou_split(const MatrixSample& X0, double t_f);

// X <- X + sqrt(dt/n) G. When shared_noise is supplied it is used as G.
FlowState brownian_step(const FlowState& state, double dt, const MatrixXcd* shared_noise = nullptr);

}  // namespace sclt
