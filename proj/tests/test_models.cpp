#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "test_util.hpp"
#include "wacal/camera.hpp"

using namespace wacal;
using namespace wacal::testutil;

namespace {

double angular_error(const Ray& a, const Point3& b) {
  const Ray u = a.normalized();
  const Ray v = b.normalized();
  return std::atan2(u.cross(v).norm(), u.dot(v));
}

bool is_closed_form_pair(ModelKind kind) {
  switch (kind) {
    case ModelKind::Pinhole:
    case ModelKind::FOV:
    case ModelKind::DS:
    case ModelKind::UCM:
    case ModelKind::UCMAlpha:
    case ModelKind::EUCM:
      return true;
    default:
      return false;
  }
}

}  // namespace

TEST_CASE("model kind string round-trip") {
  for (auto kind : all_kinds()) {
    const auto back = model_kind_from_string(to_string(kind));
    REQUIRE(back.has_value());
    CHECK(*back == kind);
  }
  CHECK(!model_kind_from_string("nonsense").has_value());
}

TEST_CASE("validate_params examples") {
  Eigen::VectorXd eucm(6);
  eucm << 500, 500, 800, 600, 0.5, 1.0;
  CHECK(validate_params(ModelKind::EUCM, eucm));
  eucm(5) = -0.1;
  CHECK(!validate_params(ModelKind::EUCM, eucm));
  eucm(5) = 1.0;
  eucm(4) = 1.2;  // alpha out of [0,1]
  CHECK(!validate_params(ModelKind::EUCM, eucm));

  // KB8 with strongly negative k1 makes d(theta) non-monotone on [0, pi/2].
  Eigen::VectorXd kb(8);
  kb << 400, 400, 800, 600, -0.5, 0, 0, 0;
  CHECK(!validate_params(ModelKind::KB8, kb, M_PI / 2));
  kb(4) = 0.05;
  CHECK(validate_params(ModelKind::KB8, kb, M_PI / 2));

  Eigen::VectorXd bad(3);
  bad << 1, 2, 3;
  CHECK_THROWS_AS(validate_params(ModelKind::Pinhole, bad),
                  std::invalid_argument);

  for (auto kind : all_kinds()) {
    const auto spec = make_spec(kind);
    CHECK(validate_params(kind, spec.params, spec.theta_max));
  }
}

TEST_CASE("pinhole on-axis example") {
  CameraSpec spec;
  spec.kind = ModelKind::Pinhole;
  spec.params = Eigen::Vector4d(1000, 1000, 800, 600);
  spec.width = 1600;
  spec.height = 1200;
  const auto r = project(spec, Point3(0, 0, 1));
  REQUIRE(r.valid);
  CHECK((r.pixel - Pixel(800, 600)).norm() < 1e-15);
  CHECK(!project(spec, Point3(0, 0, -1)).valid);
  CHECK(!project(spec, Point3(0.5, 0.5, 0)).valid);
}

TEST_CASE("radtan with zero distortion reduces to pinhole") {
  CameraSpec rt = make_spec(ModelKind::RadTan);
  rt.params.tail(4).setZero();
  CameraSpec pin = make_spec(ModelKind::Pinhole);
  std::mt19937 gen(11);
  for (int i = 0; i < 1000; ++i) {
    const Point3 x = random_valid_point(pin, gen);
    const auto a = project(rt, x);
    const auto b = project(pin, x);
    REQUIRE(a.valid);
    REQUIRE(b.valid);
    CHECK((a.pixel - b.pixel).norm() < 1e-12);
  }
}

TEST_CASE("thin prism and mei with zero distortion reduce to pinhole") {
  CameraSpec pin = make_spec(ModelKind::Pinhole);
  CameraSpec tp = make_spec(ModelKind::ThinPrism);
  tp.params.tail(5).setZero();
  tp.params.head(4) = pin.params;
  CameraSpec ua = make_spec(ModelKind::UCMAlpha);
  ua.params.head(4) = pin.params;
  ua.params(4) = 0.0;  // alpha = 0
  CameraSpec mei = make_spec(ModelKind::Mei);
  mei.params.head(4) = pin.params;  // xi = 0 means gamma = f
  mei.params.tail(7).setZero();
  std::mt19937 gen(12);
  for (int i = 0; i < 300; ++i) {
    const Point3 x = random_valid_point(pin, gen);
    const Pixel ref = project(pin, x).pixel;
    CHECK((project(tp, x).pixel - ref).norm() < 1e-12);
    CHECK((project(ua, x).pixel - ref).norm() < 1e-12);
    CHECK((project(mei, x).pixel - ref).norm() < 1e-12);
  }
}

TEST_CASE("kb8 on-axis limit hits the principal point") {
  const CameraSpec spec = make_spec(ModelKind::KB8);
  const auto r = project(spec, Point3(0, 0, 2.0));
  REQUIRE(r.valid);
  CHECK((r.pixel - Pixel(800, 600)).norm() < 1e-12);
}

TEST_CASE("ds with xi=0 equals ucm-alpha") {
  CameraSpec ds = make_spec(ModelKind::DS);
  ds.params(4) = 0.0;
  CameraSpec ua = make_spec(ModelKind::UCMAlpha);
  ua.params.head(4) = ds.params.head(4);
  ua.params(4) = ds.params(5);
  std::mt19937 gen(13);
  for (int i = 0; i < 500; ++i) {
    const Point3 x = random_valid_point(ua, gen);
    const auto a = project(ds, x);
    const auto b = project(ua, x);
    REQUIRE(a.valid);
    REQUIRE(b.valid);
    CHECK((a.pixel - b.pixel).norm() < 1e-12);
  }
}

TEST_CASE("eucm with beta=1 equals ucm-alpha") {
  CameraSpec eucm = make_spec(ModelKind::EUCM);
  eucm.params(5) = 1.0;
  CameraSpec ua = make_spec(ModelKind::UCMAlpha);
  ua.params.head(5) = eucm.params.head(5);
  std::mt19937 gen(14);
  for (int i = 0; i < 500; ++i) {
    const Point3 x = random_valid_point(ua, gen);
    const auto a = project(eucm, x);
    const auto b = project(ua, x);
    REQUIRE(a.valid);
    REQUIRE(b.valid);
    CHECK((a.pixel - b.pixel).norm() < 1e-12);
  }
}

TEST_CASE("ucm form conversion") {
  CameraSpec ucm = make_spec(ModelKind::UCM);

  SUBCASE("xi=0 degenerates to pinhole scaling") {
    ucm.params(4) = 0.0;
    const auto a = ucm_to_alpha(ucm);
    CHECK(a.params(4) == 0.0);
    CHECK(a.params(0) == ucm.params(0));
  }

  SUBCASE("xi=1 gives alpha=0.5, f=gamma/2") {
    ucm.params(4) = 1.0;
    const auto a = ucm_to_alpha(ucm);
    CHECK(a.params(4) == doctest::Approx(0.5));
    CHECK(a.params(0) == doctest::Approx(ucm.params(0) / 2));
  }

  SUBCASE("round-trip identity within 1e-14") {
    const auto a = ucm_to_alpha(ucm);
    const auto back = alpha_to_ucm(a);
    CHECK((back.params - ucm.params).cwiseAbs().maxCoeff() < 1e-14 *
              ucm.params.cwiseAbs().maxCoeff());
  }

  SUBCASE("alpha=1 rejected on inverse") {
    CameraSpec a = make_spec(ModelKind::UCMAlpha);
    a.params(4) = 1.0;
    CHECK_THROWS_AS(alpha_to_ucm(a), std::domain_error);
  }

  SUBCASE("both forms project identically") {
    const auto a = ucm_to_alpha(ucm);
    std::mt19937 gen(15);
    for (int i = 0; i < 500; ++i) {
      const Point3 x = random_valid_point(ucm, gen);
      const auto pu = project(ucm, x);
      const auto pa = project(a, x);
      REQUIRE(pu.valid);
      REQUIRE(pa.valid);
      CHECK((pu.pixel - pa.pixel).norm() < 1e-12);
    }
  }
}

TEST_CASE("principal point unprojects to the optical axis") {
  for (auto kind : all_kinds()) {
    CAPTURE(to_string(kind));
    const CameraSpec spec = make_spec(kind);
    const Pixel pp = kind == ModelKind::Scaramuzza
                         ? Pixel(spec.params(4), spec.params(5))
                         : Pixel(spec.params(2), spec.params(3));
    const auto r = unproject(spec, pp);
    REQUIRE(r.valid);
    CHECK(angular_error(r.ray, Point3(0, 0, 1)) < 1e-9);
  }
}

TEST_CASE("fov forward-backward identity on 1000 pixels") {
  const CameraSpec spec = make_spec(ModelKind::FOV);
  std::mt19937 gen(16);
  std::uniform_real_distribution<double> du(50.0, 1550.0);
  std::uniform_real_distribution<double> dv(50.0, 1150.0);
  for (int i = 0; i < 1000; ++i) {
    const Pixel m(du(gen), dv(gen));
    const auto un = unproject(spec, m);
    REQUIRE(un.valid);
    const auto re = project(spec, un.ray);
    REQUIRE(re.valid);
    CHECK((re.pixel - m).norm() < 1e-10);
  }
}

TEST_CASE("round-trip invariant per kind") {
  std::mt19937 gen(17);
  for (auto kind : all_kinds()) {
    CAPTURE(to_string(kind));
    const CameraSpec spec = make_spec(kind);
    const double tol = is_closed_form_pair(kind) ? 1e-12 : 1e-8;
    for (int i = 0; i < 300; ++i) {
      const Point3 x = random_valid_point(spec, gen);
      const auto pr = project(spec, x);
      REQUIRE(pr.valid);
      const auto un = unproject(spec, pr.pixel);
      REQUIRE(un.valid);
      CHECK(angular_error(un.ray, x) < tol);
    }
  }
}

TEST_CASE("kb8 round-trip up to 97 degrees off axis") {
  const CameraSpec spec = make_spec(ModelKind::KB8);
  std::mt19937 gen(18);
  std::uniform_real_distribution<double> dtheta(0.01, 97.0 * M_PI / 180.0 - 0.01);
  std::uniform_real_distribution<double> dphi(0.0, 2 * M_PI);
  for (int i = 0; i < 500; ++i) {
    const double theta = dtheta(gen);
    const double phi = dphi(gen);
    const Point3 x(std::sin(theta) * std::cos(phi),
                   std::sin(theta) * std::sin(phi), std::cos(theta));
    const auto pr = project(spec, x);
    REQUIRE(pr.valid);
    const auto un = unproject(spec, pr.pixel);
    REQUIRE(un.valid);
    CHECK(angular_error(un.ray, x) < 1e-8);
  }
}

TEST_CASE("kb8 accepts points behind the z=0 plane") {
  // theta = 95 deg, Z_c = -0.1: invalid for any pinhole composition but
  // inside a 194-degree-DAOV fisheye's field.
  CameraSpec spec = make_spec(ModelKind::KB8);
  spec.theta_max = 97.0 * M_PI / 180.0;
  const double theta = 95.0 * M_PI / 180.0;
  const double z = -0.1;
  const double r = -z * std::tan(theta);  // tan(95deg) < 0, r > 0
  const Point3 x(r / std::sqrt(2.0), r / std::sqrt(2.0), z);
  CHECK(std::abs(std::atan2(x.head<2>().norm(), x.z()) - theta) < 1e-12);
  const auto pr = project(spec, x);
  CHECK(pr.valid);

  // Past theta_max the projection must report invalid.
  const double theta2 = 98.0 * M_PI / 180.0;
  const Point3 x2(std::sin(theta2), 0, std::cos(theta2));
  CHECK(!project(spec, x2).valid);
}

TEST_CASE("division forward matches the quadratic root relation") {
  const CameraSpec spec = make_spec(ModelKind::Division);
  const double k1 = spec.params(4);
  std::mt19937 gen(19);
  for (int i = 0; i < 300; ++i) {
    const Point3 x = random_valid_point(spec, gen);
    const auto pr = project(spec, x);
    REQUIRE(pr.valid);
    const double xd = (pr.pixel.x() - spec.params(2)) / spec.params(0);
    const double yd = (pr.pixel.y() - spec.params(3)) / spec.params(1);
    const double rd2 = xd * xd + yd * yd;
    // backward model: x_n = x_d / (1 + k1 r_d^2)
    const Point3 xn(xd / (1 + k1 * rd2), yd / (1 + k1 * rd2), 1.0);
    CHECK(angular_error(xn.normalized(), x) < 1e-10);
  }
}

TEST_CASE("scaramuzza forward picks the smallest positive root") {
  const CameraSpec spec = make_spec(ModelKind::Scaramuzza);
  std::mt19937 gen(20);
  for (int i = 0; i < 300; ++i) {
    const Point3 x = random_valid_point(spec, gen);
    const auto pr = project(spec, x);
    REQUIRE(pr.valid);
    // verify the root relation w_h(rho) * r_c = Z_c * rho at the projection
    const double c = spec.params(6), d = spec.params(7), e = spec.params(8);
    const Eigen::Matrix2d A = (Eigen::Matrix2d() << c, d, e, 1).finished();
    const Eigen::Vector2d uh =
        A.inverse() *
        Eigen::Vector2d(pr.pixel.x() - spec.params(4),
                        pr.pixel.y() - spec.params(5));
    const double rho = uh.norm();
    const double w = spec.params(0) + spec.params(1) * rho * rho +
                     spec.params(2) * rho * rho * rho +
                     spec.params(3) * rho * rho * rho * rho;
    const double rc = x.head<2>().norm();
    CHECK(std::abs(w * rc - x.z() * rho) < 1e-8 * std::max(1.0, rho));
  }
}

TEST_CASE("jacobian_point pinhole example and error path") {
  CameraSpec spec = make_spec(ModelKind::Pinhole);
  const auto J = jacobian_point(spec, Point3(0, 0, 1));
  CHECK(J(0, 0) == doctest::Approx(spec.params(0)));
  CHECK(J(1, 1) == doctest::Approx(spec.params(1)));
  CHECK(std::abs(J(0, 1)) < 1e-12);
  CHECK(std::abs(J(0, 2)) < 1e-12);
  CHECK_THROWS_AS(jacobian_point(spec, Point3(0, 0, -1)), std::domain_error);
}

TEST_CASE("jacobian_params pinhole principal point column") {
  CameraSpec spec = make_spec(ModelKind::Pinhole);
  std::mt19937 gen(21);
  for (int i = 0; i < 20; ++i) {
    const Point3 x = random_valid_point(spec, gen);
    const auto J = jacobian_params(spec, x);
    CHECK(J(0, 2) == doctest::Approx(1.0));
    CHECK(J(1, 3) == doctest::Approx(1.0));
    CHECK(std::abs(J(0, 3)) < 1e-12);
  }
}

TEST_CASE("jacobians match central finite differences") {
  std::mt19937 gen(22);
  for (auto kind : all_kinds()) {
    CAPTURE(to_string(kind));
    const CameraSpec spec = make_spec(kind);
    int checked = 0;
    for (int i = 0; i < 140 && checked < 100; ++i) {
      const Point3 x = random_valid_point(spec, gen);
      Eigen::Matrix<double, 2, 3> fd_pt;
      Eigen::MatrixXd fd_par;
      try {
        fd_pt = fd_jacobian_point(spec, x);
        fd_par = fd_jacobian_params(spec, x);
      } catch (const std::runtime_error&) {
        continue;  // perturbation crossed the validity boundary
      }
      const auto J_pt = jacobian_point(spec, x);
      const auto J_par = jacobian_params(spec, x);
      const double rel_pt = (J_pt - fd_pt).cwiseAbs().maxCoeff() /
                            std::max(1.0, J_pt.cwiseAbs().maxCoeff());
      CHECK(rel_pt < 1e-5);
      // Column-wise with an FD roundoff floor: two pixel evaluations carry
      // ~1e-13 absolute noise each, amplified by 1/(2h) in the quotient.
      for (Eigen::Index k = 0; k < J_par.cols(); ++k) {
        const double h = fd_param_step(spec.params(k));
        const double noise = 3e-13 / h;
        const double err = (J_par.col(k) - fd_par.col(k)).cwiseAbs().maxCoeff();
        const double allowed =
            1e-5 * std::max(1.0, J_par.col(k).cwiseAbs().maxCoeff()) + noise;
        CHECK(err < allowed);
      }
      ++checked;
    }
    CHECK(checked == 100);
  }
}

TEST_CASE("radtan-backward fitted to a radtan camera agrees functionally") {
  // Mild distortion: a 2-term backward polynomial cannot represent the
  // exact inverse of a strong forward polynomial to 0.05 px at the corners.
  CameraSpec fwd = make_spec(ModelKind::RadTan);
  fwd.params.tail(4) << -0.1, 0.01, 1e-4, -1e-4;
  const double fx = fwd.params(0), fy = fwd.params(1);
  const double cx = fwd.params(2), cy = fwd.params(3);

  // Sample pixel -> true normalized coordinates from the forward model's
  // unprojection, then fit the backward polynomial linearly.
  std::vector<Eigen::Vector2d> dist, undist;
  for (double u = 300; u <= 1300; u += 40)
    for (double v = 150; v <= 1050; v += 36) {
      const auto un = unproject(fwd, Pixel(u, v));
      if (!un.valid || un.ray.z() < 0.1) continue;
      dist.emplace_back((u - cx) / fx, (v - cy) / fy);
      undist.emplace_back(un.ray.x() / un.ray.z(), un.ray.y() / un.ray.z());
    }
  REQUIRE(dist.size() > 100);

  Eigen::MatrixXd A(2 * dist.size(), 4);
  Eigen::VectorXd b(2 * dist.size());
  for (size_t i = 0; i < dist.size(); ++i) {
    const double xd = dist[i].x(), yd = dist[i].y();
    const double r2 = xd * xd + yd * yd;
    A.row(2 * i) << xd * r2, xd * r2 * r2, 2 * xd * yd, r2 + 2 * xd * xd;
    A.row(2 * i + 1) << yd * r2, yd * r2 * r2, r2 + 2 * yd * yd, 2 * xd * yd;
    b(2 * i) = undist[i].x() - xd;
    b(2 * i + 1) = undist[i].y() - yd;
  }
  const Eigen::Vector4d k = A.colPivHouseholderQr().solve(b);

  CameraSpec bwd;
  bwd.kind = ModelKind::RadTanBackward;
  bwd.width = fwd.width;
  bwd.height = fwd.height;
  bwd.params = fwd.params;
  bwd.params.tail(4) = k;

  // The fitted backward coefficients are genuinely different parameters.
  CHECK((k - fwd.params.tail(4)).norm() > 1e-3);

  // Functional agreement: unprojection within 0.05 px equivalent.
  double worst = 0.0;
  for (size_t i = 0; i < dist.size(); ++i) {
    const Pixel m(dist[i].x() * fx + cx, dist[i].y() * fy + cy);
    const auto ub = unproject(bwd, m);
    REQUIRE(ub.valid);
    const Eigen::Vector2d nb(ub.ray.x() / ub.ray.z(), ub.ray.y() / ub.ray.z());
    worst = std::max(worst, ((nb - undist[i]).cwiseProduct(
                                 Eigen::Vector2d(fx, fy)))
                                .norm());
  }
  CHECK(worst < 0.05);
}

TEST_CASE("validity boundaries for the unified family") {
  // EUCM with alpha > 0.5 rejects points beyond its hemisphere bound.
  CameraSpec eucm = make_spec(ModelKind::EUCM);
  eucm.params(4) = 0.7;
  CHECK(project(eucm, Point3(0, 0, 1)).valid);
  CHECK(!project(eucm, Point3(0, 0, -1)).valid);

  // DS sees slightly behind the camera when alpha is large.
  CameraSpec ds = make_spec(ModelKind::DS);
  ds.params(4) = 0.2;
  ds.params(5) = 0.65;
  CHECK(project(ds, Point3(1.0, 0, -0.05)).valid);
}

TEST_CASE("comparable focal mapping") {
  const auto rt = make_spec(ModelKind::RadTan);
  CHECK(comparable_focal(rt, 0) == rt.params(0));
  CHECK(comparable_focal(rt, 1) == rt.params(1));
  const auto sc = make_spec(ModelKind::Scaramuzza);
  CHECK(comparable_focal(sc, 0) == doctest::Approx(std::abs(sc.params(0))));
  const auto mei = make_spec(ModelKind::Mei);
  CHECK(comparable_focal(mei, 0) ==
        doctest::Approx(mei.params(0) / (1 + mei.params(4))));
  const auto ucm = make_spec(ModelKind::UCM);
  CHECK(comparable_focal(ucm, 0) ==
        doctest::Approx(ucm.params(0) / (1 + ucm.params(4))));
}
