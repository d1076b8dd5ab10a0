#pragma once

#include <cstddef>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "svi/problem.hpp"
#include "svi/problems.hpp"

namespace svi::portfolio {

enum class Frequency { Weekly, Daily };

/// Periods per year used to annualize: 50 weeks or 250 trading days.
double periods_per_year(Frequency f) noexcept;

struct PriceMatrix {
    Matrix prices;  // T x n, rows are periods
    Frequency frequency = Frequency::Weekly;
    std::vector<std::string> tickers;
};

/// Reads a price CSV: header row of tickers, one row per period. A leading
/// column headed "date" (any case) or with an empty header is skipped.
/// Throws IoError if the file cannot be read and DataError on malformed,
/// missing or nonpositive cells, or fewer than 3 rows.
PriceMatrix load_prices(const std::filesystem::path& path, Frequency frequency);
PriceMatrix parse_prices(const std::string& csv_text, Frequency frequency);

/// R[j, i] = ln(P[j+1, i] / P[j, i]).
Matrix log_returns(const PriceMatrix& p);

struct ReturnsSplit {
    Matrix in_sample;
    Matrix out_of_sample;
};

/// T_in = 2 ceil(0.9 m / 2 - 1) leading rows for m = rows(R); the rest is
/// out of sample. Requires m >= 4.
ReturnsSplit split_returns(const Matrix& returns);
std::size_t in_sample_length(std::size_t rows);

/// Sample covariance of the rows of `window` with divisor (rows - 1); a
/// single-row window has zero covariance.
Matrix sample_covariance(const Matrix& window);

/// The mean-variance QP  min 1/2 w'Sw - rho'w  s.t. 0 <= w <= a, e'w = 1
/// as LCP(q, M) over x = (w, y), y in R_+^(n+2):
///   M = [S  -C'; C  0],  C = [e'; -e'; -I],  q = (-rho; -1; 1; a).
LcpProblem build_lcp(const Matrix& sigma, const Vector& rho, const Vector& upper);

struct WindowMoments {
    Vector rho_xi;
    Matrix sigma_xi;
    Vector rho_eta;
    Matrix sigma_eta;
};

/// Moment estimates for sample size S from the in-sample returns (T_in rows,
/// h = T_in / 2). The eta-window is rows 1..S; the xi-window is the inclusive
/// 1-based slice h..h+S (S + 1 rows). Throws WindowOverrun if S > h.
WindowMoments windowed_moments(const Matrix& in_sample, std::size_t window);

/// Out-of-sample Sharpe ratio rho_out'w / sqrt(w' S_out w).
/// Throws DegenerateVariance when the portfolio return has no variation.
double sharpe(const Vector& w, const Matrix& out_of_sample);

struct Returns {
    double cumulative;  // CR: sum of per-period portfolio log returns
    double annualized;  // AR: CR / T_out * periods per year
};

Returns cumulative_and_annualized(const Vector& w, const Matrix& out_of_sample, Frequency frequency);

Vector naive_weights(std::size_t n);

/// 1/2 w'Sw - rho'w.
double mean_variance_objective(const Vector& w, const Matrix& sigma, const Vector& rho);

/// The portfolio LCP driven by moving windows of the in-sample returns: a
/// batch of size S for the xi-family holds the rows of the xi-window, the
/// eta-family the rows of the eta-window, and the batch operator is
/// M(window) x + q(window) built from that window's mean and covariance.
/// Windows are deterministic in S; the stream is not consumed.
class WindowedPortfolioProblem final : public StochasticProblem {
public:
    WindowedPortfolioProblem(Matrix in_sample, Vector upper);

    std::size_t assets() const noexcept { return static_cast<std::size_t>(upper_.size()); }
    std::size_t max_window() const noexcept { return static_cast<std::size_t>(in_sample_.rows()) / 2; }
    const Matrix& in_sample() const noexcept { return in_sample_; }
    const Vector& upper() const noexcept { return upper_; }

    /// A uniformly chosen in-sample row.
    Sample draw(RngStream& stream) const override;
    /// The LCP operator of a one-row window (zero covariance).
    Vector apply(const Sample& sample, const Vector& x) const override;
    SampleBatch sample_batch(std::size_t size, RngStream& stream, SampleFamily family) const override;
    /// Operator of the batch rows' mean and covariance (not an average of apply).
    Vector batch_mean(const SampleBatch& batch, const Vector& x) const override;

    std::string name() const override { return "portfolio"; }

private:
    struct Summary;
    std::shared_ptr<const Summary> summarize(const SampleBatch& batch) const;

    Matrix in_sample_;
    Vector upper_;
};

}  // namespace svi::portfolio
