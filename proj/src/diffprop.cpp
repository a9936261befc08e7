#include "vpinn/diffprop.hpp"

#include <cmath>

#include <fmt/format.h>

#include "vecmath.hpp"
#include "vpinn/errors.hpp"

namespace vpinn {

std::string_view to_string(Activation act) {
    switch (act) {
        case Activation::Sine: return "sine";
        case Activation::Tanh: return "tanh";
    }
    return "unknown";
}

Activation activation_from_string(std::string_view name) {
    if (name == "sine" || name == "sin") return Activation::Sine;
    if (name == "tanh") return Activation::Tanh;
    throw ConfigError(fmt::format("unknown activation '{}' (expected sine|tanh)", name));
}

DeepNetParams DeepNetParams::zeros(int input_dim, const std::vector<int>& widths, Activation act) {
    if (input_dim < 1 || input_dim > 2) {
        throw ConfigError(fmt::format("input dimension {} not in {{1, 2}}", input_dim));
    }
    if (widths.empty()) throw ConfigError("network needs at least one hidden layer");
    DeepNetParams net;
    net.input_dim = input_dim;
    net.activation = act;
    int prev = input_dim;
    for (int w : widths) {
        if (w < 1) throw ConfigError(fmt::format("hidden width {} must be positive", w));
        net.weights.push_back(Eigen::MatrixXd::Zero(w, prev));
        net.biases.push_back(Eigen::VectorXd::Zero(w));
        prev = w;
    }
    net.output = Eigen::VectorXd::Zero(prev);
    return net;
}

std::vector<int> DeepNetParams::widths() const {
    std::vector<int> out;
    for (const auto& w : weights) out.push_back(static_cast<int>(w.rows()));
    return out;
}

std::size_t DeepNetParams::parameter_count() const {
    std::size_t n = static_cast<std::size_t>(output.size());
    for (std::size_t i = 0; i < weights.size(); ++i) {
        n += static_cast<std::size_t>(weights[i].size() + biases[i].size());
    }
    return n;
}

Eigen::VectorXd DeepNetParams::flatten() const {
    Eigen::VectorXd flat(static_cast<Eigen::Index>(parameter_count()));
    Eigen::Index pos = 0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        const auto& W = weights[i];
        for (Eigen::Index r = 0; r < W.rows(); ++r)
            for (Eigen::Index c = 0; c < W.cols(); ++c) flat[pos++] = W(r, c);
        flat.segment(pos, biases[i].size()) = biases[i];
        pos += biases[i].size();
    }
    flat.segment(pos, output.size()) = output;
    return flat;
}

void DeepNetParams::assign(std::span<const double> flat) {
    if (flat.size() != parameter_count()) {
        throw ConfigError(fmt::format("parameter vector has {} entries, network needs {}",
                                      flat.size(), parameter_count()));
    }
    std::size_t pos = 0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        auto& W = weights[i];
        for (Eigen::Index r = 0; r < W.rows(); ++r)
            for (Eigen::Index c = 0; c < W.cols(); ++c) W(r, c) = flat[pos++];
        for (Eigen::Index r = 0; r < biases[i].size(); ++r) biases[i][r] = flat[pos++];
    }
    for (Eigen::Index r = 0; r < output.size(); ++r) output[r] = flat[pos++];
}

void DeepNetParams::validate() const {
    if (input_dim < 1 || input_dim > 2) {
        throw ConfigError(fmt::format("input dimension {} not in {{1, 2}}", input_dim));
    }
    if (weights.empty() || weights.size() != biases.size()) {
        throw ConfigError("network layer lists are empty or of unequal length");
    }
    Eigen::Index prev = input_dim;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        if (weights[i].cols() != prev || weights[i].rows() != biases[i].size() ||
            weights[i].rows() < 1) {
            throw ConfigError(fmt::format("layer {} has shape {}x{} with bias {}, expected {} columns",
                                          i + 1, weights[i].rows(), weights[i].cols(),
                                          biases[i].size(), prev));
        }
        prev = weights[i].rows();
    }
    if (output.size() != prev) {
        throw ConfigError(fmt::format("output map has {} weights, last hidden layer has {} units",
                                      output.size(), prev));
    }
    require_finite(flatten(), "network parameters");
}

JetBatch JetBatch::zeros_like(const JetBatch& other) {
    return {Eigen::RowVectorXd::Zero(other.u.size()),
            Eigen::MatrixXd::Zero(other.grad.rows(), other.grad.cols()),
            Eigen::MatrixXd::Zero(other.diag2.rows(), other.diag2.cols())};
}

void require_finite(const Eigen::VectorXd& v, std::string_view where) {
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (!std::isfinite(v[i])) throw NonFiniteError(std::string(where), static_cast<std::size_t>(i));
    }
}

JetTape::JetTape(const DeepNetParams& net, const Eigen::MatrixXd& points, JetOrder order)
    : net_(net), points_(points), order_(order) {
    net.validate();
    if (points.rows() != net.input_dim) {
        throw ConfigError(fmt::format("points have dimension {}, network expects {}", points.rows(),
                                      net.input_dim));
    }
    const int d = net.input_dim;
    const Eigen::Index P = points.cols();
    const int ord = static_cast<int>(order);
    layers_.resize(net.weights.size());

    for (std::size_t i = 0; i < net.weights.size(); ++i) {
        const Eigen::MatrixXd& W = net.weights[i];
        Layer& ly = layers_[i];
        const Eigen::MatrixXd& zprev = i == 0 ? points_ : layers_[i - 1].z;

        Eigen::MatrixXd a = W * zprev;
        a.colwise() += net.biases[i];

        const auto n = static_cast<std::size_t>(a.size());
        ly.z.resize(a.rows(), a.cols());
        if (net.activation == Activation::Sine) {
            ly.s1.resize(a.rows(), a.cols());
            detail::sin_array(a.data(), ly.z.data(), n);
            detail::cos_array(a.data(), ly.s1.data(), n);
            ly.s2 = -ly.z;
            if (ord >= 2) ly.s3 = -ly.s1;
        } else {
            detail::tanh_array(a.data(), ly.z.data(), n);
            const Eigen::ArrayXXd t = ly.z.array();
            const Eigen::ArrayXXd sech2 = 1.0 - t.square();
            ly.s1 = sech2.matrix();
            ly.s2 = (-2.0 * t * sech2).matrix();
            if (ord >= 2) ly.s3 = (sech2 * (6.0 * t.square() - 2.0)).matrix();
        }

        if (ord >= 1) {
            ly.ap.resize(d);
            ly.zp.resize(d);
            for (int p = 0; p < d; ++p) {
                if (i == 0) {
                    ly.ap[p] = W.col(p).replicate(1, P);
                } else {
                    ly.ap[p] = W * layers_[i - 1].zp[p];
                }
                ly.zp[p] = (ly.s1.array() * ly.ap[p].array()).matrix();
            }
        }
        if (ord >= 2) {
            ly.app.resize(d);
            ly.zpp.resize(d);
            for (int p = 0; p < d; ++p) {
                if (i == 0) {
                    ly.app[p] = Eigen::MatrixXd::Zero(W.rows(), P);
                } else {
                    ly.app[p] = W * layers_[i - 1].zpp[p];
                }
                ly.zpp[p] = (ly.s2.array() * ly.ap[p].array().square() +
                             ly.s1.array() * ly.app[p].array())
                                .matrix();
            }
        }
    }

    const Eigen::RowVectorXd ct = net.output.transpose();
    const Layer& top = layers_.back();
    jets_.u = ct * top.z;
    if (ord >= 1) {
        jets_.grad.resize(d, P);
        for (int p = 0; p < d; ++p) jets_.grad.row(p) = ct * top.zp[p];
    }
    if (ord >= 2) {
        jets_.diag2.resize(d, P);
        for (int p = 0; p < d; ++p) jets_.diag2.row(p) = ct * top.zpp[p];
    }
}

Eigen::VectorXd JetTape::backward(const JetBatch& adj) const {
    const DeepNetParams& net = net_;
    const int d = net.input_dim;
    const int ord = static_cast<int>(order_);
    const std::size_t L = net.weights.size();
    const Eigen::Index P = points_.cols();
    if (adj.u.size() != P || (ord >= 1 && (adj.grad.rows() != d || adj.grad.cols() != P)) ||
        (ord >= 2 && (adj.diag2.rows() != d || adj.diag2.cols() != P))) {
        throw ConfigError("adjoint layout does not match the tape's jets");
    }

    std::vector<Eigen::MatrixXd> gW(L);
    std::vector<Eigen::VectorXd> gb(L);

    const Layer& top = layers_.back();
    Eigen::VectorXd gc = top.z * adj.u.transpose();
    Eigen::MatrixXd zbar = net.output * adj.u;
    std::vector<Eigen::MatrixXd> zpbar(static_cast<std::size_t>(d));
    std::vector<Eigen::MatrixXd> zppbar(static_cast<std::size_t>(d));
    for (int p = 0; p < d && ord >= 1; ++p) {
        gc += top.zp[p] * adj.grad.row(p).transpose();
        zpbar[p] = net.output * adj.grad.row(p);
    }
    for (int p = 0; p < d && ord >= 2; ++p) {
        gc += top.zpp[p] * adj.diag2.row(p).transpose();
        zppbar[p] = net.output * adj.diag2.row(p);
    }

    std::vector<Eigen::MatrixXd> apbar(static_cast<std::size_t>(d));
    std::vector<Eigen::MatrixXd> appbar(static_cast<std::size_t>(d));
    for (std::size_t ii = L; ii-- > 0;) {
        const Layer& ly = layers_[ii];
        const Eigen::MatrixXd& W = net.weights[ii];
        Eigen::ArrayXXd abar = ly.s1.array() * zbar.array();
        for (int p = 0; p < d && ord >= 1; ++p) {
            apbar[p] = (ly.s1.array() * zpbar[p].array()).matrix();
            abar += ly.s2.array() * ly.ap[p].array() * zpbar[p].array();
        }
        for (int p = 0; p < d && ord >= 2; ++p) {
            const Eigen::ArrayXXd ap = ly.ap[p].array();
            const Eigen::ArrayXXd zb = zppbar[p].array();
            appbar[p] = (ly.s1.array() * zb).matrix();
            apbar[p].array() += 2.0 * ly.s2.array() * ap * zb;
            abar += (ly.s3.array() * ap.square() + ly.s2.array() * ly.app[p].array()) * zb;
        }
        const Eigen::MatrixXd abar_m = abar.matrix();

        if (ii > 0) {
            const Layer& prev = layers_[ii - 1];
            gW[ii] = abar_m * prev.z.transpose();
            for (int p = 0; p < d && ord >= 1; ++p) gW[ii] += apbar[p] * prev.zp[p].transpose();
            for (int p = 0; p < d && ord >= 2; ++p) gW[ii] += appbar[p] * prev.zpp[p].transpose();
            zbar = W.transpose() * abar_m;
            for (int p = 0; p < d && ord >= 1; ++p) zpbar[p] = W.transpose() * apbar[p];
            for (int p = 0; p < d && ord >= 2; ++p) zppbar[p] = W.transpose() * appbar[p];
        } else {
            // input tangents are the unit vectors e_p, second tangents vanish
            gW[ii] = abar_m * points_.transpose();
            for (int p = 0; p < d && ord >= 1; ++p) gW[ii].col(p) += apbar[p].rowwise().sum();
        }
        gb[ii] = abar_m.rowwise().sum();
    }

    Eigen::VectorXd flat(static_cast<Eigen::Index>(net.parameter_count()));
    Eigen::Index pos = 0;
    for (std::size_t i = 0; i < L; ++i) {
        for (Eigen::Index r = 0; r < gW[i].rows(); ++r)
            for (Eigen::Index c = 0; c < gW[i].cols(); ++c) flat[pos++] = gW[i](r, c);
        flat.segment(pos, gb[i].size()) = gb[i];
        pos += gb[i].size();
    }
    flat.segment(pos, gc.size()) = gc;
    return flat;
}

EvalJet eval_jet(const DeepNetParams& net, std::span<const double> x) {
    if (static_cast<int>(x.size()) != net.input_dim) {
        throw ConfigError(
            fmt::format("point has dimension {}, network expects {}", x.size(), net.input_dim));
    }
    Eigen::MatrixXd pts(net.input_dim, 1);
    for (int p = 0; p < net.input_dim; ++p) pts(p, 0) = x[static_cast<std::size_t>(p)];
    JetTape tape(net, pts, JetOrder::Second);
    const JetBatch& j = tape.jets();
    return {pts.col(0), j.u[0], j.grad.col(0), j.diag2.col(0)};
}

JetBatch eval_batch(const DeepNetParams& net, const Eigen::MatrixXd& points, JetOrder order) {
    return JetTape(net, points, order).jets();
}

ValueAndGradient param_gradient(const DeepNetParams& net, const Eigen::MatrixXd& points,
                                JetOrder order, const ScalarBuilder& builder) {
    JetTape tape(net, points, order);
    JetBatch adjoint = JetBatch::zeros_like(tape.jets());
    ValueAndGradient out;
    out.value = builder(tape.jets(), adjoint);
    out.gradient = tape.backward(adjoint);
    require_finite(out.gradient, "param_gradient");
    return out;
}

}  // namespace vpinn
