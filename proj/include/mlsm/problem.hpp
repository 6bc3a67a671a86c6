#pragma once

#include <cstddef>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace mlsm {

/// Raised for malformed or physically inconsistent problem input.
class ProblemError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class BoundaryKind { vacuum };

/// Multigroup slab problem. sigma_s[g][gp] is the transfer cross section gp -> g.
struct ProblemSpec {
    std::string name;
    std::size_t groups = 0;
    std::vector<double> sigma_t;
    std::vector<std::vector<double>> sigma_s;
    std::vector<double> source;
    double width = 0.0;
    std::size_t cells = 0;
    std::size_t quad_half_order = 0;
    BoundaryKind bc_left = BoundaryKind::vacuum;
    BoundaryKind bc_right = BoundaryKind::vacuum;

    /// Total scattering out of group g, summed over destinations.
    [[nodiscard]] double scattering_out(std::size_t g) const;
    [[nodiscard]] double scattering_ratio(std::size_t g) const { return scattering_out(g) / sigma_t[g]; }
    [[nodiscard]] double sigma_a(std::size_t g) const { return sigma_t[g] - scattering_out(g); }
    [[nodiscard]] std::vector<double> scattering_ratios() const;
};

/// Checks shapes, signs and subcriticality (c_g <= 1 + 1e-12). Throws ProblemError.
void validate(const ProblemSpec& spec);

/// Parses a JSON problem document with keys groups, sigma_t, sigma_s, source,
/// width, cells, quad_half_order, bc_left, bc_right. Validates the result.
[[nodiscard]] ProblemSpec load_problem(std::string_view document);
[[nodiscard]] ProblemSpec load_problem_file(const std::filesystem::path& path);

/// Built-in problems: "test1" (10 groups) and "test2" (7 groups).
[[nodiscard]] ProblemSpec builtin_problem(std::string_view name);
[[nodiscard]] std::vector<std::string> builtin_names();

/// Reference scattering ratios for a built-in problem.
[[nodiscard]] std::vector<double> builtin_reference_ratios(std::string_view name);

struct ValidationReport {
    std::vector<double> computed;
    std::vector<double> reference;
    double max_abs_error = 0.0;
    std::size_t worst_group = 0;
    double tolerance = 1e-4;
    bool passed = false;
};

[[nodiscard]] ValidationReport validate_scattering(const ProblemSpec& spec,
                                                   const std::vector<double>& reference_c,
                                                   double tolerance = 1e-4);

/// S[g][g'] = sigma_{s,g'->g} / max_{g''!=g} sigma_{s,g''->g}; diagonal 0.
struct ConnectionStrengthMatrix {
    std::vector<std::vector<double>> S;
};

[[nodiscard]] ConnectionStrengthMatrix connection_strength(const ProblemSpec& spec);

}  // namespace mlsm
