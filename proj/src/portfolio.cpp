#include "svi/portfolio.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "svi/error.hpp"

namespace svi::portfolio {

namespace {

std::string trim(std::string_view s) {
    auto b = s.find_first_not_of(" \t\r\"");
    auto e = s.find_last_not_of(" \t\r\"");
    return b == std::string_view::npos ? std::string{} : std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::size_t start = 0;
    for (;;) {
        const auto comma = line.find(',', start);
        cells.push_back(trim(std::string_view(line).substr(start, comma - start)));
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return cells;
}

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    return s;
}

std::string cell_ref(std::size_t row, std::size_t col) {
    return "row " + std::to_string(row) + ", column " + std::to_string(col);
}

Vector column_means(const Matrix& m) { return m.colwise().mean().transpose(); }

}  // namespace

double periods_per_year(Frequency f) noexcept { return f == Frequency::Weekly ? 50.0 : 250.0; }

PriceMatrix parse_prices(const std::string& csv_text, Frequency frequency) {
    std::istringstream in(csv_text);
    std::string line;
    std::vector<std::string> header;
    while (std::getline(in, line)) {
        if (!trim(line).empty()) {
            header = split_csv_line(line);
            break;
        }
    }
    if (header.empty()) throw Error(ErrorCode::DataError, "price file has no header row");

    const bool skip_first = header.front().empty() || lower(header.front()) == "date";
    const std::size_t first = skip_first ? 1 : 0;
    if (header.size() <= first) throw Error(ErrorCode::DataError, "price file has no asset columns");
    const std::size_t n = header.size() - first;

    std::vector<std::vector<double>> rows;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const auto cells = split_csv_line(line);
        if (cells.size() != header.size())
            throw Error(ErrorCode::DataError, "row " + std::to_string(line_no) + " has " + std::to_string(cells.size()) +
                                                  " cells, expected " + std::to_string(header.size()));
        std::vector<double> row(n);
        for (std::size_t i = 0; i < n; ++i) {
            const std::string& cell = cells[first + i];
            double v = 0.0;
            const auto* end = cell.data() + cell.size();
            const auto res = std::from_chars(cell.data(), end, v);
            if (cell.empty() || res.ec != std::errc{} || res.ptr != end)
                throw Error(ErrorCode::DataError, "missing or non-numeric price at " + cell_ref(line_no, first + i + 1));
            if (!(v > 0.0) || !std::isfinite(v))
                throw Error(ErrorCode::DataError, "nonpositive price at " + cell_ref(line_no, first + i + 1));
            row[i] = v;
        }
        rows.push_back(std::move(row));
    }
    if (rows.size() < 3)
        throw Error(ErrorCode::DataError, "need at least 3 price rows, found " + std::to_string(rows.size()));

    PriceMatrix out;
    out.frequency = frequency;
    out.tickers.assign(header.begin() + static_cast<std::ptrdiff_t>(first), header.end());
    out.prices.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(n));
    for (std::size_t j = 0; j < rows.size(); ++j)
        for (std::size_t i = 0; i < n; ++i)
            out.prices(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = rows[j][i];
    return out;
}

PriceMatrix load_prices(const std::filesystem::path& path, Frequency frequency) {
    std::ifstream file(path, std::ios::binary);
    if (!file) throw Error(ErrorCode::IoError, "cannot open price file " + path.string());
    std::ostringstream buf;
    buf << file.rdbuf();
    return parse_prices(buf.str(), frequency);
}

Matrix log_returns(const PriceMatrix& p) {
    const auto T = p.prices.rows();
    return (p.prices.bottomRows(T - 1).array() / p.prices.topRows(T - 1).array()).log().matrix();
}

std::size_t in_sample_length(std::size_t rows) {
    // 2 * ceil(0.9 m / 2 - 1) = 2 * ceil((9m - 20) / 20), in integers.
    const long long num = 9LL * static_cast<long long>(rows) - 20;
    const long long q = num >= 0 ? (num + 19) / 20 : -((-num) / 20);
    return static_cast<std::size_t>(2 * std::max(0LL, q));
}

ReturnsSplit split_returns(const Matrix& returns) {
    const auto m = static_cast<std::size_t>(returns.rows());
    if (m < 4) throw Error(ErrorCode::DataError, "need at least 4 return rows to split, found " + std::to_string(m));
    const auto t_in = static_cast<Eigen::Index>(in_sample_length(m));
    return {returns.topRows(t_in), returns.bottomRows(returns.rows() - t_in)};
}

Matrix sample_covariance(const Matrix& window) {
    const auto m = window.rows();
    if (m < 2) return Matrix::Zero(window.cols(), window.cols());
    const Matrix centered = window.rowwise() - window.colwise().mean();
    return (centered.transpose() * centered) / static_cast<double>(m - 1);
}

LcpProblem build_lcp(const Matrix& sigma, const Vector& rho, const Vector& upper) {
    const auto n = rho.size();
    if (n == 0) throw Error(ErrorCode::InvalidDimension, "portfolio needs at least one asset");
    if (sigma.rows() != n || sigma.cols() != n || upper.size() != n)
        throw Error(ErrorCode::DimensionMismatch, "covariance, mean and bound sizes disagree");
    if ((sigma - sigma.transpose()).norm() > 1e-10)
        throw Error(ErrorCode::InvalidCovariance, "covariance matrix is not symmetric");

    Matrix C = Matrix::Zero(n + 2, n);
    C.row(0).setOnes();
    C.row(1).setConstant(-1.0);
    C.bottomRows(n) = -Matrix::Identity(n, n);

    const auto m = 2 * n + 2;
    LcpProblem lcp{Matrix::Zero(m, m), Vector(m)};
    lcp.M.topLeftCorner(n, n) = sigma;
    lcp.M.topRightCorner(n, n + 2) = -C.transpose();
    lcp.M.bottomLeftCorner(n + 2, n) = C;
    lcp.q << -rho, -1.0, 1.0, upper;
    return lcp;
}

WindowMoments windowed_moments(const Matrix& in_sample, std::size_t window) {
    const auto half = static_cast<std::size_t>(in_sample.rows()) / 2;
    if (window == 0) throw Error(ErrorCode::EmptyBatch, "window length must be >= 1");
    if (window > half)
        throw Error(ErrorCode::WindowOverrun,
                    "window " + std::to_string(window) + " exceeds half the in-sample length " + std::to_string(half));
    const auto S = static_cast<Eigen::Index>(window);
    const auto h = static_cast<Eigen::Index>(half);
    // 1-based inclusive rows h .. h + S, i.e. 0-based h - 1 .. h + S - 1.
    const Matrix xi = in_sample.middleRows(std::max<Eigen::Index>(h - 1, 0), S + 1);
    const Matrix eta = in_sample.topRows(S);
    return {column_means(xi), sample_covariance(xi), column_means(eta), sample_covariance(eta)};
}

double sharpe(const Vector& w, const Matrix& out_of_sample) {
    if (w.size() != out_of_sample.cols()) throw Error(ErrorCode::DimensionMismatch, "weights do not match asset count");
    if (out_of_sample.rows() < 2)
        throw Error(ErrorCode::DegenerateVariance, "need at least two out-of-sample periods");
    const Vector mean = column_means(out_of_sample);
    const double var = w.dot(sample_covariance(out_of_sample) * w);
    const Vector p = out_of_sample * w;
    const double scale = p.cwiseAbs().maxCoeff();
    const double floor = 64.0 * std::numeric_limits<double>::epsilon() * scale;
    if (!(var > floor * floor)) throw Error(ErrorCode::DegenerateVariance, "portfolio return has zero variance");
    return mean.dot(w) / std::sqrt(var);
}

Returns cumulative_and_annualized(const Vector& w, const Matrix& out_of_sample, Frequency frequency) {
    if (w.size() != out_of_sample.cols()) throw Error(ErrorCode::DimensionMismatch, "weights do not match asset count");
    const double cr = (out_of_sample * w).sum();
    const auto periods = static_cast<double>(out_of_sample.rows());
    const double ar = periods > 0 ? cr / periods * periods_per_year(frequency) : 0.0;
    return {cr, ar};
}

Vector naive_weights(std::size_t n) {
    if (n == 0) throw Error(ErrorCode::InvalidDimension, "portfolio needs at least one asset");
    return Vector::Constant(static_cast<Eigen::Index>(n), 1.0 / static_cast<double>(n));
}

double mean_variance_objective(const Vector& w, const Matrix& sigma, const Vector& rho) {
    return 0.5 * w.dot(sigma * w) - rho.dot(w);
}

// ---------------------------------------------------------------------------

struct WindowedPortfolioProblem::Summary final : BatchSummary {
    LcpProblem lcp;
};

WindowedPortfolioProblem::WindowedPortfolioProblem(Matrix in_sample, Vector upper)
    : StochasticProblem(FeasibleSet::orthant(2 * static_cast<std::size_t>(upper.size()) + 2)),
      in_sample_(std::move(in_sample)), upper_(std::move(upper)) {
    if (in_sample_.cols() != upper_.size())
        throw Error(ErrorCode::DimensionMismatch, "bounds do not match the number of assets");
    if (in_sample_.rows() < 2) throw Error(ErrorCode::DataError, "need at least two in-sample rows");
    if ((upper_.array() <= 0.0).any()) throw Error(ErrorCode::InvalidRange, "weight caps must be positive");
    if (upper_.sum() < 1.0) throw Error(ErrorCode::InvalidRange, "weight caps sum below 1; no feasible portfolio");
}

Sample WindowedPortfolioProblem::draw(RngStream& stream) const {
    const auto rows = static_cast<double>(in_sample_.rows());
    auto j = static_cast<Eigen::Index>(stream.uniform(0.0, rows));
    j = std::min<Eigen::Index>(j, in_sample_.rows() - 1);
    return {in_sample_.row(j).transpose()};
}

Vector WindowedPortfolioProblem::apply(const Sample& sample, const Vector& x) const {
    check_dim(x);
    const auto n = upper_.size();
    if (sample.data.size() != n) throw Error(ErrorCode::DimensionMismatch, "return row has the wrong length");
    const LcpProblem lcp = build_lcp(Matrix::Zero(n, n), sample.data, upper_);
    return lcp.M * x + lcp.q;
}

std::shared_ptr<const WindowedPortfolioProblem::Summary> WindowedPortfolioProblem::summarize(
    const SampleBatch& batch) const {
    const auto n = upper_.size();
    Matrix rows(static_cast<Eigen::Index>(batch.size()), n);
    for (std::size_t j = 0; j < batch.size(); ++j) rows.row(static_cast<Eigen::Index>(j)) = batch.samples[j].data.transpose();
    auto sum = std::make_shared<Summary>();
    sum->lcp = build_lcp(sample_covariance(rows), column_means(rows), upper_);
    return sum;
}

SampleBatch WindowedPortfolioProblem::sample_batch(std::size_t size, RngStream&, SampleFamily family) const {
    if (size == 0) throw Error(ErrorCode::EmptyBatch, "window length must be >= 1");
    if (size > max_window())
        throw Error(ErrorCode::WindowOverrun,
                    "window " + std::to_string(size) + " exceeds half the in-sample length " +
                        std::to_string(max_window()));
    const auto S = static_cast<Eigen::Index>(size);
    const auto h = static_cast<Eigen::Index>(max_window());
    const Eigen::Index start = family == SampleFamily::Xi ? std::max<Eigen::Index>(h - 1, 0) : 0;
    const Eigen::Index count = family == SampleFamily::Xi ? S + 1 : S;
    SampleBatch batch;
    batch.samples.reserve(static_cast<std::size_t>(count));
    for (Eigen::Index j = start; j < start + count; ++j) batch.samples.push_back({in_sample_.row(j).transpose()});
    batch.summary = summarize(batch);
    return batch;
}

Vector WindowedPortfolioProblem::batch_mean(const SampleBatch& batch, const Vector& x) const {
    check_dim(x);
    auto sum = std::dynamic_pointer_cast<const Summary>(batch.summary);
    if (!sum) sum = summarize(batch);
    return sum->lcp.M * x + sum->lcp.q;
}

}  // namespace svi::portfolio
