#include "rbb/latent.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "rbb/error.hpp"
#include "rbb/random.hpp"

namespace rbb {

namespace {

Eigen::MatrixXd centered(const Eigen::MatrixXd& m, Eigen::RowVectorXd* center = nullptr) {
    const Eigen::RowVectorXd mean = m.colwise().mean();
    if (center) *center = mean;
    return m.rowwise() - mean;
}

/// Flips `v` (and reports the flip) so its largest-magnitude entry is positive.
bool fix_sign(Eigen::VectorXd& v) {
    Eigen::Index arg = 0;
    v.cwiseAbs().maxCoeff(&arg);
    if (v[arg] < 0.0) {
        v = -v;
        return true;
    }
    return false;
}

} // namespace

std::string_view to_string(LatentSource source) {
    switch (source) {
    case LatentSource::Pca: return "pca";
    case LatentSource::PlsXSide: return "pls_t_side";
    case LatentSource::PlsYSide: return "pls_u_side";
    case LatentSource::NnEncoder: return "nn_encoder";
    }
    return "unknown";
}

PcaResult pca_first_component(const Eigen::MatrixXd& m, const std::string& provenance) {
    if (m.rows() < 2) fail(ErrorKind::InvalidSize, "PCA needs at least two samples");
    if (!m.allFinite()) fail(ErrorKind::InvalidArgument, "PCA input contains non-finite values");
    PcaResult out;
    const Eigen::MatrixXd xc = centered(m, &out.center);
    if (xc.cwiseAbs().maxCoeff() == 0.0) fail(ErrorKind::RankZero, "matrix is constant after centring");

    Eigen::BDCSVD<Eigen::MatrixXd> svd(xc, Eigen::ComputeThinV);
    out.loading = svd.matrixV().col(0);
    fix_sign(out.loading);
    out.latent = {xc * out.loading, LatentSource::Pca, provenance};
    return out;
}

PlsResult pls_first_component(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y, const PlsOptions& options,
                              const std::string& x_name, const std::string& y_name) {
    if (x.rows() != y.rows()) fail(ErrorKind::DimensionMismatch, "PLS blocks have different sample counts");
    if (x.rows() < 2) fail(ErrorKind::InvalidSize, "PLS needs at least two samples");
    const Eigen::MatrixXd xc = centered(x);
    const Eigen::MatrixXd yc = centered(y);
    if (xc.cwiseAbs().maxCoeff() == 0.0 || yc.cwiseAbs().maxCoeff() == 0.0) {
        fail(ErrorKind::RankZero, "PLS block is constant after centring");
    }

    Eigen::Index start = 0;
    yc.colwise().squaredNorm().maxCoeff(&start);
    Eigen::VectorXd u = yc.col(start);
    Eigen::VectorXd t = Eigen::VectorXd::Zero(x.rows());
    Eigen::VectorXd w, c;

    PlsResult out;
    bool converged = false;
    for (int iter = 1; iter <= options.max_iter; ++iter) {
        w = xc.transpose() * u;
        const double wn = w.norm();
        if (wn == 0.0) fail(ErrorKind::RankZero, "X and Y blocks have zero cross-covariance");
        w /= wn;
        Eigen::VectorXd t_new = xc * w;
        c = yc.transpose() * t_new;
        const double cn = c.norm();
        if (cn == 0.0) fail(ErrorKind::RankZero, "X and Y blocks have zero cross-covariance");
        c /= cn;
        u = yc * c;
        const double change = (t_new - t).norm() / std::max(t_new.norm(), std::numeric_limits<double>::min());
        t = std::move(t_new);
        out.iterations = iter;
        if (change < options.tol) {
            converged = true;
            break;
        }
    }
    if (!converged) {
        fail(ErrorKind::NotConverged, "NIPALS did not reach tolerance in " + std::to_string(options.max_iter) + " iterations");
    }
    if (fix_sign(w)) t = -t;
    if (fix_sign(c)) u = -u;
    out.x_weights = w;
    out.y_weights = c;
    out.x_side = {t, LatentSource::PlsXSide, x_name + "," + y_name};
    out.y_side = {u, LatentSource::PlsYSide, x_name + "," + y_name};
    return out;
}

// ---------------------------------------------------------------------------
// Encoder-decoder

EncoderDecoder EncoderDecoder::random(Eigen::Index inputs, Eigen::Index outputs, int hidden, std::uint64_t seed,
                                     std::uint64_t stream) {
    if (hidden < 1) fail(ErrorKind::InvalidArgument, "hidden_units must be at least 1");
    auto rng = make_stream(seed, 0x6e6e, stream); // "nn"
    auto fill = [&](auto& block, double fan_in) {
        std::uniform_real_distribution<double> u(-1.0 / std::sqrt(fan_in), 1.0 / std::sqrt(fan_in));
        for (Eigen::Index i = 0; i < block.size(); ++i) block.data()[i] = u(rng);
    };
    const Eigen::Index h = hidden;
    EncoderDecoder net;
    net.w1.resize(h, inputs); net.b1.resize(h);
    net.w2.resize(h);
    net.w3.resize(h); net.b3.resize(h);
    net.w4.resize(outputs, h); net.b4.resize(outputs);
    fill(net.w1, static_cast<double>(inputs)); fill(net.b1, static_cast<double>(inputs));
    fill(net.w2, static_cast<double>(h));
    Eigen::Matrix<double, 1, 1> b2;
    fill(b2, static_cast<double>(h));
    net.b2 = b2(0, 0);
    fill(net.w3, 1.0); fill(net.b3, 1.0);
    fill(net.w4, static_cast<double>(h)); fill(net.b4, static_cast<double>(h));
    net.x_center = Eigen::RowVectorXd::Zero(inputs);
    net.y_center = Eigen::RowVectorXd::Zero(outputs);
    return net;
}

std::size_t EncoderDecoder::parameter_count() const {
    return static_cast<std::size_t>(w1.size() + b1.size() + w2.size() + 1 + w3.size() + b3.size() + w4.size() + b4.size());
}

Eigen::VectorXd EncoderDecoder::flatten() const {
    Eigen::VectorXd theta(static_cast<Eigen::Index>(parameter_count()));
    Eigen::Index o = 0;
    auto put = [&](const auto& block) {
        theta.segment(o, block.size()) = Eigen::Map<const Eigen::VectorXd>(block.data(), block.size());
        o += block.size();
    };
    put(w1); put(b1); put(w2);
    theta[o++] = b2;
    put(w3); put(b3); put(w4); put(b4);
    return theta;
}

void EncoderDecoder::unflatten(const Eigen::VectorXd& theta) {
    if (theta.size() != static_cast<Eigen::Index>(parameter_count())) {
        fail(ErrorKind::DimensionMismatch, "parameter vector has the wrong length");
    }
    Eigen::Index o = 0;
    auto take = [&](auto& block) {
        Eigen::Map<Eigen::VectorXd>(block.data(), block.size()) = theta.segment(o, block.size());
        o += block.size();
    };
    take(w1); take(b1); take(w2);
    b2 = theta[o++];
    take(w3); take(b3); take(w4); take(b4);
}

namespace {

struct Forward {
    Eigen::MatrixXd a1, h1;
    Eigen::VectorXd code;
    Eigen::MatrixXd a3, h3;
    Eigen::MatrixXd out;
};

Forward forward(const EncoderDecoder& net, const Eigen::MatrixXd& xc) {
    Forward f;
    f.a1 = (xc * net.w1.transpose()).rowwise() + net.b1.transpose();
    f.h1 = f.a1.cwiseMax(0.0);
    f.code = (f.h1 * net.w2.transpose()).array() + net.b2;
    f.a3 = (f.code * net.w3.transpose()).rowwise() + net.b3.transpose();
    f.h3 = f.a3.cwiseMax(0.0);
    f.out = (f.h3 * net.w4.transpose()).rowwise() + net.b4.transpose();
    return f;
}

Eigen::MatrixXd decode_centered(const EncoderDecoder& net, const Eigen::VectorXd& code) {
    const Eigen::MatrixXd a3 = (code * net.w3.transpose()).rowwise() + net.b3.transpose();
    return (a3.cwiseMax(0.0) * net.w4.transpose()).rowwise() + net.b4.transpose();
}

} // namespace

Eigen::VectorXd EncoderDecoder::encode(const Eigen::MatrixXd& x) const {
    return forward(*this, x.rowwise() - x_center).code;
}

Eigen::MatrixXd EncoderDecoder::decode(const Eigen::VectorXd& h) const {
    return decode_centered(*this, h).rowwise() + y_center;
}

double EncoderDecoder::loss(const Eigen::MatrixXd& xc, const Eigen::MatrixXd& yc, Eigen::VectorXd* gradient) const {
    const Forward f = forward(*this, xc);
    const Eigen::MatrixXd diff = f.out - yc;
    const double count = static_cast<double>(diff.size());
    const double value = diff.squaredNorm() / count;
    if (!gradient) return value;

    EncoderDecoder g = *this;
    const Eigen::MatrixXd d_out = 2.0 * diff / count;
    g.w4 = d_out.transpose() * f.h3;
    g.b4 = d_out.colwise().sum().transpose();
    const Eigen::MatrixXd d_a3 = ((d_out * w4).array() * (f.a3.array() > 0.0).cast<double>()).matrix();
    g.w3 = d_a3.transpose() * f.code;
    g.b3 = d_a3.colwise().sum().transpose();
    const Eigen::VectorXd d_code = d_a3 * w3;
    g.w2 = d_code.transpose() * f.h1;
    g.b2 = d_code.sum();
    const Eigen::MatrixXd d_a1 = ((d_code * w2).array() * (f.a1.array() > 0.0).cast<double>()).matrix();
    g.w1 = d_a1.transpose() * xc;
    g.b1 = d_a1.colwise().sum().transpose();
    *gradient = g.flatten();
    return value;
}

namespace {

struct Training {
    EncoderDecoder network;
    double selection_loss = 0.0;
    bool converged = false;
    int epochs_run = 0;
};

Training train_network(const Eigen::MatrixXd& xc, const Eigen::MatrixXd& yc, const std::vector<Eigen::Index>& fit,
                       const std::vector<Eigen::Index>& val, const EncoderDecoderConfig& cfg, std::uint64_t restart) {
    Training out;
    out.network = EncoderDecoder::random(xc.cols(), yc.cols(), cfg.hidden_units, cfg.seed, restart);
    auto& net = out.network;
    const bool early_stop = !val.empty();
    const Eigen::MatrixXd x_fit = early_stop ? Eigen::MatrixXd(xc(fit, Eigen::all)) : xc;
    const Eigen::MatrixXd y_fit = early_stop ? Eigen::MatrixXd(yc(fit, Eigen::all)) : yc;
    const Eigen::MatrixXd x_val = early_stop ? Eigen::MatrixXd(xc(val, Eigen::all)) : Eigen::MatrixXd();
    const Eigen::MatrixXd y_val = early_stop ? Eigen::MatrixXd(yc(val, Eigen::all)) : Eigen::MatrixXd();

    Eigen::VectorXd theta = net.flatten();
    Eigen::VectorXd best_theta = theta;
    double best_val = std::numeric_limits<double>::infinity();
    int since_best = 0;
    Eigen::VectorXd m1 = Eigen::VectorXd::Zero(theta.size()), m2 = Eigen::VectorXd::Zero(theta.size());
    Eigen::VectorXd grad;
    constexpr double b1 = 0.9, b2 = 0.999, eps = 1e-8;
    double c1 = 1.0, c2 = 1.0;
    std::vector<double> history;
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        net.unflatten(theta);
        const double value = net.loss(x_fit, y_fit, &grad);
        history.push_back(value);
        out.epochs_run = epoch + 1;
        if (early_stop) {
            const double v = net.loss(x_val, y_val);
            if (v < best_val) {
                best_val = v;
                best_theta = theta;
                since_best = 0;
            } else if (++since_best >= cfg.patience) {
                out.converged = true;
                break;
            }
        }
        if (history.size() > 50) {
            const double old = history[history.size() - 51];
            if (std::abs(old - value) <= cfg.tol * std::max(old, 1e-300)) {
                out.converged = true;
                break;
            }
        }
        c1 *= b1;
        c2 *= b2;
        m1 = b1 * m1 + (1.0 - b1) * grad;
        m2 = b2 * m2 + (1.0 - b2) * grad.cwiseProduct(grad);
        theta.array() -= cfg.learning_rate * (m1.array() / (1.0 - c1)) / ((m2.array() / (1.0 - c2)).sqrt() + eps);
    }
    net.unflatten(theta);
    if (early_stop) {
        if (net.loss(x_val, y_val) < best_val) best_theta = theta;
        net.unflatten(best_theta);
        out.selection_loss = net.loss(x_val, y_val);
    } else {
        out.selection_loss = net.loss(x_fit, y_fit);
    }
    return out;
}

} // namespace

EncoderDecoderResult encoder_decoder_latent(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y,
                                            const EncoderDecoderConfig& cfg, const std::string& provenance) {
    if (x.rows() != y.rows()) fail(ErrorKind::DimensionMismatch, "encoder input and output have different sample counts");
    if (cfg.epochs < 1) fail(ErrorKind::InvalidArgument, "epochs must be at least 1");
    if (cfg.restarts < 1) fail(ErrorKind::InvalidArgument, "restarts must be at least 1");
    if (!(cfg.learning_rate > 0.0)) fail(ErrorKind::InvalidArgument, "learning_rate must be positive");
    if (!(cfg.validation_fraction >= 0.0 && cfg.validation_fraction < 1.0)) {
        fail(ErrorKind::InvalidArgument, "validation_fraction must lie in [0, 1)");
    }
    if (cfg.hidden_units < 1) fail(ErrorKind::InvalidArgument, "hidden_units must be at least 1");

    Eigen::RowVectorXd x_center, y_center;
    const Eigen::MatrixXd xc = centered(x, &x_center);
    const Eigen::MatrixXd yc = centered(y, &y_center);

    const Eigen::Index n = x.rows();
    const auto held = static_cast<Eigen::Index>(std::floor(cfg.validation_fraction * static_cast<double>(n)));
    std::vector<Eigen::Index> fit, val;
    if (held >= 1 && n - held >= 2) {
        std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
        std::iota(order.begin(), order.end(), Eigen::Index{0});
        auto rng = make_stream(cfg.seed, 0x76616c); // "val"
        std::shuffle(order.begin(), order.end(), rng);
        val.assign(order.begin(), order.begin() + held);
        fit.assign(order.begin() + held, order.end());
    }

    Training best;
    for (int r = 0; r < cfg.restarts; ++r) {
        Training t = train_network(xc, yc, fit, val, cfg, static_cast<std::uint64_t>(r));
        if (r == 0 || t.selection_loss < best.selection_loss) best = std::move(t);
    }

    EncoderDecoderResult out;
    out.network = std::move(best.network);
    out.network.x_center = x_center;
    out.network.y_center = y_center;
    out.converged = best.converged;
    out.epochs_run = best.epochs_run;
    out.final_loss = out.network.loss(xc, yc);
    out.latent = {forward(out.network, xc).code, LatentSource::NnEncoder, provenance};
    return out;
}

double variance_explained(const Eigen::MatrixXd& original, const Eigen::MatrixXd& reconstruction) {
    if (original.rows() != reconstruction.rows() || original.cols() != reconstruction.cols()) {
        fail(ErrorKind::DimensionMismatch, "reconstruction shape differs from the original");
    }
    const double ss_tot = centered(original).squaredNorm();
    if (ss_tot == 0.0) fail(ErrorKind::ZeroVariance, "original data have no variance about the column means");
    return 1.0 - (original - reconstruction).squaredNorm() / ss_tot;
}

Eigen::MatrixXd linear_decode(const Eigen::VectorXd& scores, const Eigen::MatrixXd& data) {
    if (scores.size() != data.rows()) fail(ErrorKind::DimensionMismatch, "score length differs from data rows");
    const Eigen::RowVectorXd mean = data.colwise().mean();
    const Eigen::VectorXd s = scores.array() - scores.mean();
    const double ss = s.squaredNorm();
    Eigen::MatrixXd out = mean.replicate(data.rows(), 1);
    if (ss == 0.0) return out;
    const Eigen::RowVectorXd slope = (s.transpose() * (data.rowwise() - mean)) / ss;
    out += s * slope;
    return out;
}

RbbApproximation approximate_latent_with_rbb(const LatentRepresentation& h, const StrictlyPositiveMatrix& m,
                                             const LearnerConfig& config, AggregationMode mode,
                                             const Eigen::MatrixXd& target, const Decoder& decoder) {
    if (h.scores.size() != m.samples()) fail(ErrorKind::DimensionMismatch, "latent scores do not match matrix rows");
    if (target.rows() != m.samples()) fail(ErrorKind::DimensionMismatch, "target rows do not match matrix rows");
    if (!h.scores.allFinite()) fail(ErrorKind::InvalidArgument, "latent scores are not finite");

    ModelSpec spec;
    spec.link = Link::Identity;
    RbbApproximation out;
    out.model = relaxed_gradient_learner(m, Outcome::continuous(h.scores), spec, config, mode);
    out.approximation = out.model.fitted;
    out.active = out.model.biomarker.active();
    out.features = static_cast<std::size_t>(m.features());
    out.sparsity = static_cast<double>(out.active) / static_cast<double>(out.features);

    auto reconstruct = [&](const Eigen::VectorXd& scores) {
        return decoder ? decoder(scores) : linear_decode(scores, target);
    };
    out.latent_r2 = variance_explained(target, reconstruct(h.scores));
    out.rbb_r2 = variance_explained(target, reconstruct(out.approximation));
    return out;
}

} // namespace rbb
