#include "fig8/integrator.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

namespace fig8 {

namespace {

// Dormand-Prince 8(5,3) coefficients (Hairer, Norsett & Wanner, DOP853).
namespace dp {
constexpr double c2 = 0.526001519587677318785587544488e-01;
constexpr double c3 = 0.789002279381515978178381316732e-01;
constexpr double c4 = 0.118350341907227396726757197510e+00;
constexpr double c5 = 0.281649658092772603273242802490e+00;
constexpr double c6 = 0.333333333333333333333333333333e+00;
constexpr double c7 = 0.25e+00;
constexpr double c8 = 0.307692307692307692307692307692e+00;
constexpr double c9 = 0.651282051282051282051282051282e+00;
constexpr double c10 = 0.6e+00;
constexpr double c11 = 0.857142857142857142857142857142e+00;

constexpr double b1 = 5.42937341165687622380535766363e-2;
constexpr double b6 = 4.45031289275240888144113950566e0;
constexpr double b7 = 1.89151789931450038304281599044e0;
constexpr double b8 = -5.8012039600105847814672114227e0;
constexpr double b9 = 3.1116436695781989440891606237e-1;
constexpr double b10 = -1.52160949662516078556178806805e-1;
constexpr double b11 = 2.01365400804030348374776537501e-1;
constexpr double b12 = 4.47106157277725905176885569043e-2;

constexpr double bhh1 = 0.244094488188976377952755905512e+00;
constexpr double bhh2 = 0.733846688281611857341361741547e+00;
constexpr double bhh3 = 0.220588235294117647058823529412e-01;

constexpr double er1 = 0.1312004499419488073250102996e-01;
constexpr double er6 = -0.1225156446376204440720569753e+01;
constexpr double er7 = -0.4957589496572501915214079952e+00;
constexpr double er8 = 0.1664377182454986536961530415e+01;
constexpr double er9 = -0.3503288487499736816886487290e+00;
constexpr double er10 = 0.3341791187130174790297318841e+00;
constexpr double er11 = 0.8192320648511571246570742613e-01;
constexpr double er12 = -0.2235530786388629525884427845e-01;

constexpr double a21 = 5.26001519587677318785587544488e-2;
constexpr double a31 = 1.97250569845378994544595329183e-2;
constexpr double a32 = 5.91751709536136983633785987549e-2;
constexpr double a41 = 2.95875854768068491816892993775e-2;
constexpr double a43 = 8.87627564304205475450678981324e-2;
constexpr double a51 = 2.41365134159266685502369798665e-1;
constexpr double a53 = -8.84549479328286085344864962717e-1;
constexpr double a54 = 9.24834003261792003115737966543e-1;
constexpr double a61 = 3.7037037037037037037037037037e-2;
constexpr double a64 = 1.70828608729473871279604482173e-1;
constexpr double a65 = 1.25467687566822425016691814123e-1;
constexpr double a71 = 3.7109375e-2;
constexpr double a74 = 1.70252211019544039314978060272e-1;
constexpr double a75 = 6.02165389804559606850219397283e-2;
constexpr double a76 = -1.7578125e-2;
constexpr double a81 = 3.70920001185047927108779319836e-2;
constexpr double a84 = 1.70383925712239993810214054705e-1;
constexpr double a85 = 1.07262030446373284651809199168e-1;
constexpr double a86 = -1.53194377486244017527936158236e-2;
constexpr double a87 = 8.27378916381402288758473766002e-3;
constexpr double a91 = 6.24110958716075717114429577812e-1;
constexpr double a94 = -3.36089262944694129406857109825e0;
constexpr double a95 = -8.68219346841726006818189891453e-1;
constexpr double a96 = 2.75920996994467083049415600797e1;
constexpr double a97 = 2.01540675504778934086186788979e1;
constexpr double a98 = -4.34898841810699588477366255144e1;
constexpr double a101 = 4.77662536438264365890433908527e-1;
constexpr double a104 = -2.48811461997166764192642586468e0;
constexpr double a105 = -5.90290826836842996371446475743e-1;
constexpr double a106 = 2.12300514481811942347288949897e1;
constexpr double a107 = 1.52792336328824235832596922938e1;
constexpr double a108 = -3.32882109689848629194453265587e1;
constexpr double a109 = -2.03312017085086261358222928593e-2;
constexpr double a111 = -9.3714243008598732571704021658e-1;
constexpr double a114 = 5.18637242884406370830023853209e0;
constexpr double a115 = 1.09143734899672957818500254654e0;
constexpr double a116 = -8.14978701074692612513997267357e0;
constexpr double a117 = -1.85200656599969598641566180701e1;
constexpr double a118 = 2.27394870993505042818970056734e1;
constexpr double a119 = 2.49360555267965238987089396762e0;
constexpr double a1110 = -3.0467644718982195003823669022e0;
constexpr double a121 = 2.27331014751653820792359768449e0;
constexpr double a124 = -1.05344954667372501984066689879e1;
constexpr double a125 = -2.00087205822486249909675718444e0;
constexpr double a126 = -1.79589318631187989172765950534e1;
constexpr double a127 = 2.79488845294199600508499808837e1;
constexpr double a128 = -2.85899827713502369474065508674e0;
constexpr double a129 = -8.87285693353062954433549289258e0;
constexpr double a1210 = 1.23605671757943030647266201528e1;
constexpr double a1211 = 6.43392746015763530355970484046e-1;

// Dense-output extra stages and coefficients (order 7 interpolant).
constexpr double c14 = 0.1e+00;
constexpr double c15 = 0.2e+00;
constexpr double c16 = 0.777777777777777777777777777778e+00;

constexpr double a141 = 5.61675022830479523392909219681e-2;
constexpr double a147 = 2.53500210216624811088794765333e-1;
constexpr double a148 = -2.46239037470802489917441475441e-1;
constexpr double a149 = -1.24191423263816360469010140626e-1;
constexpr double a1410 = 1.5329179827876569731206322685e-1;
constexpr double a1411 = 8.20105229563468988491666602057e-3;
constexpr double a1412 = 7.56789766054569976138603589584e-3;
constexpr double a1413 = -8.298e-3;
constexpr double a151 = 3.18346481635021405060768473261e-2;
constexpr double a156 = 2.83009096723667755288322961402e-2;
constexpr double a157 = 5.35419883074385676223797384372e-2;
constexpr double a158 = -5.49237485713909884646569340306e-2;
constexpr double a1511 = -1.08347328697249322858509316994e-4;
constexpr double a1512 = 3.82571090835658412954920192323e-4;
constexpr double a1513 = -3.40465008687404560802977114492e-4;
constexpr double a1514 = 1.41312443674632500278074618366e-1;
constexpr double a161 = -4.28896301583791923408573538692e-1;
constexpr double a166 = -4.69762141536116384314449447206e0;
constexpr double a167 = 7.68342119606259904184240953878e0;
constexpr double a168 = 4.06898981839711007970213554331e0;
constexpr double a169 = 3.56727187455281109270669543021e-1;
constexpr double a1613 = -1.39902416515901462129418009734e-3;
constexpr double a1614 = 2.9475147891527723389556272149e0;
constexpr double a1615 = -9.15095847217987001081870187138e0;

constexpr double d41 = -0.84289382761090128651353491142e+01;
constexpr double d46 = 0.56671495351937776962531783590e+00;
constexpr double d47 = -0.30689499459498916912797304727e+01;
constexpr double d48 = 0.23846676565120698287728149680e+01;
constexpr double d49 = 0.21170345824450282767155149946e+01;
constexpr double d410 = -0.87139158377797299206789907490e+00;
constexpr double d411 = 0.22404374302607882758541771650e+01;
constexpr double d412 = 0.63157877876946881815570249290e+00;
constexpr double d413 = -0.88990336451333310820698117400e-01;
constexpr double d414 = 0.18148505520854727256656404962e+02;
constexpr double d415 = -0.91946323924783554000451984436e+01;
constexpr double d416 = -0.44360363875948939664310572000e+01;
constexpr double d51 = 0.10427508642579134603413151009e+02;
constexpr double d56 = 0.24228349177525818288430175319e+03;
constexpr double d57 = 0.16520045171727028198505394887e+03;
constexpr double d58 = -0.37454675472269020279518312152e+03;
constexpr double d59 = -0.22113666853125306036270938578e+02;
constexpr double d510 = 0.77334326684722638389603898808e+01;
constexpr double d511 = -0.30674084731089398182061213626e+02;
constexpr double d512 = -0.93321305264302278729567221706e+01;
constexpr double d513 = 0.15697238121770843886131091075e+02;
constexpr double d514 = -0.31139403219565177677282850411e+02;
constexpr double d515 = -0.93529243588444783865713862664e+01;
constexpr double d516 = 0.35816841486394083752465898540e+02;
constexpr double d61 = 0.19985053242002433820987653617e+02;
constexpr double d66 = -0.38703730874935176555105901742e+03;
constexpr double d67 = -0.18917813819516756882830838328e+03;
constexpr double d68 = 0.52780815920542364900561016686e+03;
constexpr double d69 = -0.11573902539959630126141871134e+02;
constexpr double d610 = 0.68812326946963000169666922661e+01;
constexpr double d611 = -0.10006050966910838403183860980e+01;
constexpr double d612 = 0.77771377980534432092869265740e+00;
constexpr double d613 = -0.27782057523535084065932004339e+01;
constexpr double d614 = -0.60196695231264120758267380846e+02;
constexpr double d615 = 0.84320405506677161018159903784e+02;
constexpr double d616 = 0.11992291136182789328035130030e+02;
constexpr double d71 = -0.25693933462703749003312586129e+02;
constexpr double d76 = -0.15418974869023643374053993627e+03;
constexpr double d77 = -0.23152937917604549567536039109e+03;
constexpr double d78 = 0.35763911791061412378285349910e+03;
constexpr double d79 = 0.93405324183624310003907691704e+02;
constexpr double d710 = -0.37458323136451633156875139351e+02;
constexpr double d711 = 0.10409964950896230045147246184e+03;
constexpr double d712 = 0.29840293426660503123344363579e+02;
constexpr double d713 = -0.43533456590011143754432175058e+02;
constexpr double d714 = 0.96324553959188282948394950600e+02;
constexpr double d715 = -0.39177261675615439165231486172e+02;
constexpr double d716 = -0.14972683625798562581422125276e+03;
}  // namespace dp

constexpr double kSafety = 0.9;
constexpr double kMaxShrink = 3.0;  // new step no smaller than h/3
constexpr double kMaxGrow = 6.0;    // and no larger than 6h

// One integration run of the 8(5,3) pair. Accepted steps are handed to a
// sink; `cont` is non-empty (8*dim coefficients) only when dense output was
// requested. The sink sees the step's start time, size and the new state.
// The scalar type is a template parameter: double for everything visible,
// long double for the extended-precision closure path.
struct RunResult {
    IntegrationStatus status = IntegrationStatus::ok;
    double t_reached = 0.0;
    long accepted = 0;
    std::optional<CollisionProximity> collision;
};

template <class T>
class Dop853Core {
  public:
    using Rhs = std::function<void(double, std::span<const T>, std::span<T>)>;
    using Sink = std::function<void(double, double, std::span<const T>, std::span<const T>)>;

    Dop853Core(size_t dim, Rhs rhs, const IntegratorSettings& set)
        : n_(dim), rhs_(std::move(rhs)), set_(set) {
        for (auto* v : {&y_, &ynew_, &ytmp_, &k1_, &k2_, &k3_, &k4_, &k5_, &k6_, &k7_, &k8_, &k9_,
                        &k10_, &k11_, &k12_, &fnew_, &k14_, &k15_, &k16_})
            v->resize(n_);
    }

    RunResult run(double t0, std::span<const T> y0, double t_end, bool want_dense,
                  const Sink& sink) {
        std::copy(y0.begin(), y0.end(), y_.begin());
        carry_.assign(n_, T(0));
        t_ = t0;
        const T posneg = t_end > t0 ? T(1) : T(-1);
        const T span = std::abs(T(t_end) - T(t0));
        const T hmax = std::min(T(set_.max_step), span);
        const T uround = 2 * std::numeric_limits<T>::epsilon();
        RunResult res;

        try {
            rhs_(static_cast<double>(t_), y_, k1_);
            T h = set_.initial_step > 0.0
                      ? posneg * std::min(T(set_.initial_step), hmax)
                      : initial_step_guess(hmax, posneg);
            bool reject = false, last = false;
            long nstep = 0;

            while (true) {
                if (nstep > set_.max_steps) {
                    res.status = IntegrationStatus::step_limit;
                    break;
                }
                if (std::abs(h) < T(1e-14) * span || T(0.1) * std::abs(h) <= std::abs(t_) * uround) {
                    res.status = IntegrationStatus::step_underflow;
                    break;
                }
                if ((t_ + T(1.01) * h - T(t_end)) * posneg > T(0)) {
                    h = T(t_end) - t_;
                    last = true;
                }
                ++nstep;

                const T err = twelve_stages_and_error(h);

                // Step controller: the combined estimate scales like h^8.
                const T fac11 = std::pow(err, T(1) / T(8));
                const T fac =
                    std::max(T(1) / T(kMaxGrow), std::min(T(kMaxShrink), fac11 / T(kSafety)));
                T hnew = h / fac;

                if (err <= T(1)) {
                    ++res.accepted;
                    // Re-apply the increment with compensated summation so
                    // accumulation roundoff does not random-walk over long
                    // spans (closure runs amplify it by the orbit's
                    // sensitivity).
                    for (size_t i = 0; i < n_; ++i) {
                        const T incr = h * ksum_[i] - carry_[i];
                        const T next = y_[i] + incr;
                        carry_[i] = (next - y_[i]) - incr;
                        ynew_[i] = next;
                    }
                    rhs_(static_cast<double>(t_ + h), ynew_, fnew_);

                    if (want_dense) {
                        prepare_dense(h);
                        sink(static_cast<double>(t_), static_cast<double>(h), ynew_, cont_);
                    } else {
                        sink(static_cast<double>(t_), static_cast<double>(h), ynew_, {});
                    }

                    std::swap(y_, ynew_);
                    std::swap(k1_, fnew_);
                    t_ += h;
                    if (last) break;

                    if (std::abs(hnew) > hmax) hnew = posneg * hmax;
                    if (reject) hnew = posneg * std::min(std::abs(hnew), std::abs(h));
                    reject = false;
                } else {
                    hnew = h / std::min(T(kMaxShrink), fac11 / T(kSafety));
                    reject = true;
                    last = false;
                }
                h = hnew;
            }
        } catch (const CollisionProximity& cp) {
            res.status = IntegrationStatus::collision;
            res.collision = cp;
        }
        res.t_reached = static_cast<double>(t_);
        return res;
    }

  private:
    // Stages 1..12; fills ynew_ with the 8th-order solution and returns the
    // scaled error estimate of DOP853 (the 5th/3rd-order combination that
    // behaves like an order-8 local error).
    T twelve_stages_and_error(T h) {
        using namespace dp;
        const size_t n = n_;
        const T t = t_;
        auto stage = [&](std::vector<T>& out, double c) {
            rhs_(static_cast<double>(t + T(c) * h), ytmp_, out);
        };

        for (size_t i = 0; i < n; ++i) ytmp_[i] = y_[i] + h * a21 * k1_[i];
        stage(k2_, c2);
        for (size_t i = 0; i < n; ++i) ytmp_[i] = y_[i] + h * (a31 * k1_[i] + a32 * k2_[i]);
        stage(k3_, c3);
        for (size_t i = 0; i < n; ++i) ytmp_[i] = y_[i] + h * (a41 * k1_[i] + a43 * k3_[i]);
        stage(k4_, c4);
        for (size_t i = 0; i < n; ++i)
            ytmp_[i] = y_[i] + h * (a51 * k1_[i] + a53 * k3_[i] + a54 * k4_[i]);
        stage(k5_, c5);
        for (size_t i = 0; i < n; ++i)
            ytmp_[i] = y_[i] + h * (a61 * k1_[i] + a64 * k4_[i] + a65 * k5_[i]);
        stage(k6_, c6);
        for (size_t i = 0; i < n; ++i)
            ytmp_[i] = y_[i] + h * (a71 * k1_[i] + a74 * k4_[i] + a75 * k5_[i] + a76 * k6_[i]);
        stage(k7_, c7);
        for (size_t i = 0; i < n; ++i)
            ytmp_[i] = y_[i] + h * (a81 * k1_[i] + a84 * k4_[i] + a85 * k5_[i] + a86 * k6_[i] +
                                    a87 * k7_[i]);
        stage(k8_, c8);
        for (size_t i = 0; i < n; ++i)
            ytmp_[i] = y_[i] + h * (a91 * k1_[i] + a94 * k4_[i] + a95 * k5_[i] + a96 * k6_[i] +
                                    a97 * k7_[i] + a98 * k8_[i]);
        stage(k9_, c9);
        for (size_t i = 0; i < n; ++i)
            ytmp_[i] = y_[i] + h * (a101 * k1_[i] + a104 * k4_[i] + a105 * k5_[i] + a106 * k6_[i] +
                                    a107 * k7_[i] + a108 * k8_[i] + a109 * k9_[i]);
        stage(k10_, c10);
        for (size_t i = 0; i < n; ++i)
            ytmp_[i] = y_[i] + h * (a111 * k1_[i] + a114 * k4_[i] + a115 * k5_[i] + a116 * k6_[i] +
                                    a117 * k7_[i] + a118 * k8_[i] + a119 * k9_[i] + a1110 * k10_[i]);
        stage(k11_, c11);
        for (size_t i = 0; i < n; ++i)
            ytmp_[i] = y_[i] + h * (a121 * k1_[i] + a124 * k4_[i] + a125 * k5_[i] + a126 * k6_[i] +
                                    a127 * k7_[i] + a128 * k8_[i] + a129 * k9_[i] +
                                    a1210 * k10_[i] + a1211 * k11_[i]);
        rhs_(static_cast<double>(t + h), ytmp_, k12_);

        T err3 = 0.0, err5 = 0.0;
        ksum_.resize(n);
        for (size_t i = 0; i < n; ++i) {
            const T ksum = T(b1) * k1_[i] + T(b6) * k6_[i] + T(b7) * k7_[i] + T(b8) * k8_[i] +
                           T(b9) * k9_[i] + T(b10) * k10_[i] + T(b11) * k11_[i] + T(b12) * k12_[i];
            ksum_[i] = ksum;
            ynew_[i] = y_[i] + h * ksum;
            const T sk = T(1) / (T(set_.abs_tol) +
                                 T(set_.rel_tol) * std::max(std::abs(y_[i]), std::abs(ynew_[i])));
            T sqr = (ksum - T(bhh1) * k1_[i] - T(bhh2) * k9_[i] - T(bhh3) * k12_[i]) * sk;
            err3 += sqr * sqr;
            sqr = (T(er1) * k1_[i] + T(er6) * k6_[i] + T(er7) * k7_[i] + T(er8) * k8_[i] +
                   T(er9) * k9_[i] + T(er10) * k10_[i] + T(er11) * k11_[i] + T(er12) * k12_[i]) *
                  sk;
            err5 += sqr * sqr;
        }
        T deno = err5 + T(0.01) * err3;
        if (deno <= T(0)) deno = T(1);
        return std::abs(h) * err5 * std::sqrt(T(1) / (T(n) * deno));
    }

    // Order-7 interpolant coefficients for the step just accepted; costs the
    // three extra stages 14..16.
    void prepare_dense(T h) {
        using namespace dp;
        const size_t n = n_;
        const T t = t_;
        cont_.resize(8 * n);
        T* rc = cont_.data();
        for (size_t i = 0; i < n; ++i) {
            rc[i] = y_[i];
            const T ydiff = ynew_[i] - y_[i];
            rc[n + i] = ydiff;
            const T bspl = h * k1_[i] - ydiff;
            rc[2 * n + i] = bspl;
            rc[3 * n + i] = ydiff - h * fnew_[i] - bspl;
            rc[4 * n + i] = d41 * k1_[i] + d46 * k6_[i] + d47 * k7_[i] + d48 * k8_[i] +
                            d49 * k9_[i] + d410 * k10_[i] + d411 * k11_[i] + d412 * k12_[i];
            rc[5 * n + i] = d51 * k1_[i] + d56 * k6_[i] + d57 * k7_[i] + d58 * k8_[i] +
                            d59 * k9_[i] + d510 * k10_[i] + d511 * k11_[i] + d512 * k12_[i];
            rc[6 * n + i] = d61 * k1_[i] + d66 * k6_[i] + d67 * k7_[i] + d68 * k8_[i] +
                            d69 * k9_[i] + d610 * k10_[i] + d611 * k11_[i] + d612 * k12_[i];
            rc[7 * n + i] = d71 * k1_[i] + d76 * k6_[i] + d77 * k7_[i] + d78 * k8_[i] +
                            d79 * k9_[i] + d710 * k10_[i] + d711 * k11_[i] + d712 * k12_[i];
        }
        for (size_t i = 0; i < n; ++i)
            ytmp_[i] = y_[i] + h * (a141 * k1_[i] + a147 * k7_[i] + a148 * k8_[i] +
                                    a149 * k9_[i] + a1410 * k10_[i] + a1411 * k11_[i] +
                                    a1412 * k12_[i] + a1413 * fnew_[i]);
        rhs_(static_cast<double>(t + T(c14) * h), ytmp_, k14_);
        for (size_t i = 0; i < n; ++i)
            ytmp_[i] = y_[i] + h * (a151 * k1_[i] + a156 * k6_[i] + a157 * k7_[i] +
                                    a158 * k8_[i] + a1511 * k11_[i] + a1512 * k12_[i] +
                                    a1513 * fnew_[i] + a1514 * k14_[i]);
        rhs_(static_cast<double>(t + T(c15) * h), ytmp_, k15_);
        for (size_t i = 0; i < n; ++i)
            ytmp_[i] = y_[i] + h * (a161 * k1_[i] + a166 * k6_[i] + a167 * k7_[i] +
                                    a168 * k8_[i] + a169 * k9_[i] + a1613 * fnew_[i] +
                                    a1614 * k14_[i] + a1615 * k15_[i]);
        rhs_(static_cast<double>(t + T(c16) * h), ytmp_, k16_);
        for (size_t i = 0; i < n; ++i) {
            rc[4 * n + i] = h * (rc[4 * n + i] + d413 * fnew_[i] + d414 * k14_[i] +
                                 d415 * k15_[i] + d416 * k16_[i]);
            rc[5 * n + i] = h * (rc[5 * n + i] + d513 * fnew_[i] + d514 * k14_[i] +
                                 d515 * k15_[i] + d516 * k16_[i]);
            rc[6 * n + i] = h * (rc[6 * n + i] + d613 * fnew_[i] + d614 * k14_[i] +
                                 d615 * k15_[i] + d616 * k16_[i]);
            rc[7 * n + i] = h * (rc[7 * n + i] + d713 * fnew_[i] + d714 * k14_[i] +
                                 d715 * k15_[i] + d716 * k16_[i]);
        }
    }

    // Standard starting-step heuristic; assumes k1_ = f(t0, y0).
    T initial_step_guess(T hmax, T posneg) {
        T dnf = 0.0, dny = 0.0;
        for (size_t i = 0; i < n_; ++i) {
            const T sk = T(set_.abs_tol) + T(set_.rel_tol) * std::abs(y_[i]);
            T sqr = k1_[i] / sk;
            dnf += sqr * sqr;
            sqr = y_[i] / sk;
            dny += sqr * sqr;
        }
        T h = (dnf <= T(1e-10) || dny <= T(1e-10)) ? T(1e-6) : std::sqrt(dny / dnf) * T(0.01);
        h = std::min(h, hmax) * posneg;

        for (size_t i = 0; i < n_; ++i) ytmp_[i] = y_[i] + h * k1_[i];
        rhs_(static_cast<double>(t_ + h), ytmp_, k2_);
        T der2 = 0.0;
        for (size_t i = 0; i < n_; ++i) {
            const T sqr = (k2_[i] - k1_[i]) / (T(set_.abs_tol) + T(set_.rel_tol) * std::abs(y_[i]));
            der2 += sqr * sqr;
        }
        der2 = std::sqrt(der2) / std::abs(h);

        const T der12 = std::max(der2, std::sqrt(dnf));
        const T h1 = der12 <= T(1e-15) ? std::max(T(1e-6), std::abs(h) * T(1e-3))
                                       : std::pow(T(0.01) / der12, T(1) / T(8));
        return std::min(T(100) * std::abs(h), std::min(h1, hmax)) * posneg;
    }

    size_t n_;
    Rhs rhs_;
    IntegratorSettings set_;
    T t_ = 0.0;
    std::vector<T> y_, ynew_, ytmp_, ksum_, carry_;
    std::vector<T> k1_, k2_, k3_, k4_, k5_, k6_, k7_, k8_, k9_, k10_, k11_, k12_;
    std::vector<T> fnew_, k14_, k15_, k16_;
    std::vector<T> cont_;
};

void validate_settings(const IntegratorSettings& s) {
    if (s.rel_tol <= 0.0 || s.abs_tol <= 0.0) throw DomainError("tolerances must be positive");
    if (s.max_step <= 0.0) throw DomainError("max_step must be positive");
}

}  // namespace

State Trajectory::eval_segment(size_t idx, double t) const {
    const Segment& seg = segments_[idx];
    const size_t n = static_cast<size_t>(dim_);
    const double s = (t - seg.t0) / seg.h;
    const double s1 = 1.0 - s;
    const double* rc = seg.cont.data();
    std::vector<double> out(n);
    for (size_t i = 0; i < n; ++i) {
        out[i] = rc[i] + s * (rc[n + i] +
                              s1 * (rc[2 * n + i] +
                                    s * (rc[3 * n + i] +
                                         s1 * (rc[4 * n + i] +
                                               s * (rc[5 * n + i] +
                                                    s1 * (rc[6 * n + i] + s * rc[7 * n + i]))))));
    }
    return State::from_flat(t, out);
}

State Trajectory::at(double t) const {
    if (segments_.empty()) {
        if (t == t_begin_) return first_;
        throw DomainError("empty trajectory");
    }
    const double lo = std::min(t_begin_, t_end_), hi = std::max(t_begin_, t_end_);
    const double slack = 1e-9 * (hi - lo) + 1e-12;
    if (t < lo - slack || t > hi + slack)
        throw DomainError("time " + std::to_string(t) + " outside trajectory span");
    // times_ is monotone in the direction of integration.
    const bool forward = t_end_ >= t_begin_;
    size_t idx;
    if (forward) {
        auto it = std::upper_bound(times_.begin(), times_.end(), t);
        idx = static_cast<size_t>(std::clamp<long>(it - times_.begin() - 1, 0,
                                                   static_cast<long>(segments_.size()) - 1));
    } else {
        auto it = std::upper_bound(times_.begin(), times_.end(), t, std::greater<double>());
        idx = static_cast<size_t>(std::clamp<long>(it - times_.begin() - 1, 0,
                                                   static_cast<long>(segments_.size()) - 1));
    }
    return eval_segment(idx, t);
}

Trajectory integrate(const SystemConfig& config, const State& s0, double t_end,
                     const IntegratorSettings& settings) {
    validate_settings(settings);
    if (t_end == s0.t) throw DomainError("t_end must differ from the initial time");
    const size_t dim = 4 * static_cast<size_t>(config.size());
    std::vector<double> y0(dim);
    s0.to_flat(y0);

    Trajectory traj;
    traj.dim_ = static_cast<int>(dim);
    traj.t_begin_ = s0.t;
    traj.first_ = s0;
    traj.last_ = s0;
    traj.times_.push_back(s0.t);
    traj.min_pair_distance_ = min_pairwise_distance(config, s0);

    Dop853Core<double> core(dim, [&config](double t, std::span<const double> u, std::span<double> du) {
        nbody_field_flat(config, t, u, du);
    }, settings);

    auto sink = [&](double t_old, double h, std::span<const double> w,
                    std::span<const double> cont) {
        traj.times_.push_back(t_old + h);
        traj.segments_.push_back({t_old, h, std::vector<double>(cont.begin(), cont.end())});
        traj.last_ = State::from_flat(t_old + h, w);
        traj.min_pair_distance_ =
            std::min(traj.min_pair_distance_, min_pairwise_distance(config, traj.last_));
    };
    RunResult res = core.run(s0.t, y0, t_end, /*want_dense=*/true, sink);

    traj.t_end_ = res.t_reached;
    traj.collision_ = res.collision;
    traj.status_ = res.status;
    return traj;
}

State flow(const SystemConfig& config, const State& s0, double span,
           const IntegratorSettings& settings) {
    if (span == 0.0) return s0;
    return flow_summary(config, s0, span, settings).state;
}

FlowSummary flow_summary(const SystemConfig& config, const State& s0, double span,
                         const IntegratorSettings& settings) {
    validate_settings(settings);
    if (span == 0.0) return {s0, min_pairwise_distance(config, s0), 0};
    const size_t dim = 4 * static_cast<size_t>(config.size());
    std::vector<double> y0(dim), last(dim);
    s0.to_flat(y0);
    last = y0;

    double min_dist = min_pairwise_distance(config, s0);
    Dop853Core<double> core(dim, [&config](double t, std::span<const double> u, std::span<double> du) {
        nbody_field_flat(config, t, u, du);
    }, settings);
    auto sink = [&](double t_old, double h, std::span<const double> w, std::span<const double>) {
        std::copy(w.begin(), w.end(), last.begin());
        min_dist = std::min(min_dist, min_pairwise_distance(config, State::from_flat(t_old + h, w)));
    };
    RunResult res = core.run(s0.t, y0, s0.t + span, /*want_dense=*/false, sink);

    if (res.status == IntegrationStatus::collision) throw *res.collision;
    if (res.status == IntegrationStatus::step_underflow) throw StepSizeUnderflow(res.t_reached);
    if (res.status == IntegrationStatus::step_limit)
        throw Error("step limit exceeded at t=" + std::to_string(res.t_reached));
    return {State::from_flat(res.t_reached, last), min_dist, res.accepted};
}

State flow_extended(const SystemConfig& config, const State& s0, double span,
                    const IntegratorSettings& settings) {
    validate_settings(settings);
    if (span == 0.0) return s0;
    const size_t dim = 4 * static_cast<size_t>(config.size());
    std::vector<double> y0d(dim);
    s0.to_flat(y0d);
    std::vector<long double> y0(y0d.begin(), y0d.end()), last = y0;

    Dop853Core<long double> core(
        dim,
        [&config](double t, std::span<const long double> u, std::span<long double> du) {
            nbody_field_flat_ld(config, t, u, du);
        },
        settings);
    auto sink = [&](double, double, std::span<const long double> w,
                    std::span<const long double>) { std::copy(w.begin(), w.end(), last.begin()); };
    RunResult res = core.run(s0.t, y0, s0.t + span, /*want_dense=*/false, sink);

    if (res.status == IntegrationStatus::collision) throw *res.collision;
    if (res.status == IntegrationStatus::step_underflow) throw StepSizeUnderflow(res.t_reached);
    if (res.status == IntegrationStatus::step_limit)
        throw Error("step limit exceeded at t=" + std::to_string(res.t_reached));
    std::vector<double> out(last.begin(), last.end());
    return State::from_flat(res.t_reached, out);
}

double find_event(const Trajectory& traj, const std::function<double(const State&)>& event,
                  double t_guess) {
    const auto& grid = traj.times();
    if (grid.size() < 2) throw NoSignChange("trajectory has no steps");

    // Event values on the accepted grid; pick the sign-change interval
    // nearest the guess.
    std::vector<double> g(grid.size());
    for (size_t i = 0; i < grid.size(); ++i) g[i] = event(traj.at(grid[i]));

    long best = -1;
    double best_dist = std::numeric_limits<double>::infinity();
    for (size_t i = 0; i + 1 < grid.size(); ++i) {
        if (g[i] == 0.0) {
            const double d = std::abs(grid[i] - t_guess);
            if (d < best_dist) { best_dist = d; best = static_cast<long>(i); }
            continue;
        }
        if (g[i] * g[i + 1] <= 0.0) {
            const double lo = std::min(grid[i], grid[i + 1]), hi = std::max(grid[i], grid[i + 1]);
            const double d = t_guess < lo ? lo - t_guess : (t_guess > hi ? t_guess - hi : 0.0);
            if (d < best_dist) { best_dist = d; best = static_cast<long>(i); }
        }
    }
    if (best < 0) throw NoSignChange("event does not change sign along the trajectory");
    if (g[static_cast<size_t>(best)] == 0.0) return grid[static_cast<size_t>(best)];

    double ta = grid[static_cast<size_t>(best)], tb = grid[static_cast<size_t>(best) + 1];
    double ga = g[static_cast<size_t>(best)], gb = g[static_cast<size_t>(best) + 1];
    if (gb == 0.0) return tb;

    // Safeguarded Newton: derivative from a centered difference on the dense
    // output, bisection whenever the step leaves the bracket.
    double t = 0.5 * (ta + tb);
    double gt = event(traj.at(t));
    const double width0 = std::abs(tb - ta);
    for (int iter = 0; iter < 200; ++iter) {
        if (std::abs(gt) < 1e-11) return t;
        if (gt * ga <= 0.0) { tb = t; gb = gt; } else { ta = t; ga = gt; }
        if (std::abs(tb - ta) < 1e-15 * std::max(1.0, std::abs(ta))) break;

        const double dt = std::max(1e-7 * width0, 1e-12);
        const double lo = std::min(ta, tb), hi = std::max(ta, tb);
        const double tp = std::min(t + dt, hi), tm = std::max(t - dt, lo);
        const double slope = (event(traj.at(tp)) - event(traj.at(tm))) / (tp - tm);
        double tn = (slope != 0.0) ? t - gt / slope : 0.5 * (ta + tb);
        if (!(tn > lo && tn < hi)) tn = 0.5 * (ta + tb);
        t = tn;
        gt = event(traj.at(t));
    }
    if (std::abs(gt) < 1e-11) return t;
    throw NoConvergence(200, std::abs(gt));
}

}  // namespace fig8
