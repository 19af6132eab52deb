#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstring>

#include "sdm/camera.hpp"
#include "sdm/dataset.hpp"
#include "sdm/depth_search.hpp"
#include "sdm/epipolar.hpp"
#include "sdm/io.hpp"
#include "sdm/keyframe.hpp"
#include "sdm/map_update.hpp"
#include "sdm/pipeline.hpp"
#include "sdm/pose.hpp"
#include "sdm/regularize.hpp"
#include "sdm/run_config.hpp"

namespace py = pybind11;

namespace {

sdm::Image8 image_from_array(
    const py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>&
        array) {
  if (array.ndim() != 2)
    throw std::invalid_argument("expected a 2-D uint8 image array");
  sdm::Image8 image(static_cast<int>(array.shape(1)),
                    static_cast<int>(array.shape(0)));
  std::memcpy(image.pixels.data(), array.data(), image.pixels.size());
  return image;
}

py::array_t<std::uint8_t> array_from_image(const sdm::Image8& image) {
  py::array_t<std::uint8_t> out({image.height, image.width});
  std::memcpy(out.mutable_data(), image.pixels.data(), image.pixels.size());
  return out;
}

template <typename T, typename Get>
py::array_t<T> field_array(const sdm::Keyframe& kf, Get get) {
  py::array_t<T> out({kf.height(), kf.width()});
  T* dst = out.mutable_data();
  for (const sdm::DepthHypothesis& h : kf.hypotheses) *dst++ = get(h);
  return out;
}

}  // namespace

PYBIND11_MODULE(sdmapper, m) {
  m.doc() = "Semi-dense depth estimation and pipeline performance model";

  py::class_<sdm::CameraIntrinsics>(m, "CameraIntrinsics")
      .def(py::init([](double fx, double fy, double cx, double cy, int width,
                       int height) {
             return sdm::CameraIntrinsics{fx, fy, cx, cy, width, height};
           }),
           py::arg("fx"), py::arg("fy"), py::arg("cx"), py::arg("cy"),
           py::arg("width"), py::arg("height"))
      .def_readwrite("fx", &sdm::CameraIntrinsics::fx)
      .def_readwrite("fy", &sdm::CameraIntrinsics::fy)
      .def_readwrite("cx", &sdm::CameraIntrinsics::cx)
      .def_readwrite("cy", &sdm::CameraIntrinsics::cy)
      .def_readwrite("width", &sdm::CameraIntrinsics::width)
      .def_readwrite("height", &sdm::CameraIntrinsics::height)
      .def("valid", &sdm::CameraIntrinsics::valid);

  py::class_<sdm::Pose>(m, "Pose")
      .def(py::init<>())
      .def(py::init([](const Eigen::Matrix3d& rotation,
                       const Eigen::Vector3d& translation) {
             return sdm::Pose{rotation, translation};
           }),
           py::arg("rotation"), py::arg("translation"))
      .def_readwrite("rotation", &sdm::Pose::rotation)
      .def_readwrite("translation", &sdm::Pose::translation)
      .def("apply", &sdm::Pose::apply)
      .def("inverse", &sdm::Pose::inverse)
      .def("is_rigid", &sdm::Pose::is_rigid, py::arg("tol") = 1e-9)
      .def("__mul__", &sdm::Pose::operator*);

  py::enum_<sdm::Verdict>(m, "Verdict")
      .value("SCAN", sdm::Verdict::Scan)
      .value("SKIP_LOW_GRADIENT", sdm::Verdict::SkipLowGradient)
      .value("SKIP_BLACKLISTED", sdm::Verdict::SkipBlacklisted)
      .value("SKIP_OUT_OF_FRAME", sdm::Verdict::SkipOutOfFrame)
      .value("SKIP_GEOMETRY", sdm::Verdict::SkipGeometry);

  py::class_<sdm::EpipolarParams>(m, "EpipolarParams")
      .def(py::init<>())
      .def_readwrite("idepth_min", &sdm::EpipolarParams::idepth_min)
      .def_readwrite("idepth_max", &sdm::EpipolarParams::idepth_max)
      .def_readwrite("max_steps", &sdm::EpipolarParams::max_steps)
      .def_readwrite("step", &sdm::EpipolarParams::step)
      .def_readwrite("min_epl_length", &sdm::EpipolarParams::min_epl_length)
      .def_readwrite("min_search_length",
                     &sdm::EpipolarParams::min_search_length);

  py::class_<sdm::SearchParams>(m, "SearchParams")
      .def(py::init<>())
      .def_readwrite("ambiguity_ratio", &sdm::SearchParams::ambiguity_ratio)
      .def_readwrite("max_error", &sdm::SearchParams::max_error)
      .def_readwrite("sigma_i", &sdm::SearchParams::sigma_i)
      .def_readwrite("sigma_l", &sdm::SearchParams::sigma_l)
      .def_readwrite("sigma_max", &sdm::SearchParams::sigma_max);

  py::class_<sdm::FilterParams>(m, "FilterParams")
      .def(py::init<>())
      .def_readwrite("radius", &sdm::FilterParams::radius)
      .def_readwrite("min_valid_neighbours",
                     &sdm::FilterParams::min_valid_neighbours)
      .def_readwrite("gate", &sdm::FilterParams::gate)
      .def_readwrite("fill_variance_inflation",
                     &sdm::FilterParams::fill_variance_inflation);

  py::class_<sdm::MapUpdateParams>(m, "MapUpdateParams")
      .def(py::init<>())
      .def_readwrite("gradient_threshold",
                     &sdm::MapUpdateParams::gradient_threshold)
      .def_readwrite("blacklist_threshold",
                     &sdm::MapUpdateParams::blacklist_threshold)
      .def_readwrite("prior_validity_min",
                     &sdm::MapUpdateParams::prior_validity_min)
      .def_readwrite("epipolar", &sdm::MapUpdateParams::epipolar)
      .def_readwrite("search", &sdm::MapUpdateParams::search)
      .def_readwrite("new_variance_inflation",
                     &sdm::MapUpdateParams::new_variance_inflation)
      .def_readwrite("filter", &sdm::MapUpdateParams::filter)
      .def_readwrite("enable_hole_fill", &sdm::MapUpdateParams::enable_hole_fill)
      .def_readwrite("enable_smooth", &sdm::MapUpdateParams::enable_smooth)
      .def_readwrite("threads", &sdm::MapUpdateParams::threads);

  py::class_<sdm::Keyframe>(m, "Keyframe")
      .def(py::init([](const py::array_t<std::uint8_t, py::array::c_style |
                                                           py::array::forcecast>&
                           image,
                       const sdm::Pose& pose) {
             return sdm::Keyframe(image_from_array(image), pose);
           }),
           py::arg("image"), py::arg("pose") = sdm::Pose{})
      .def_property_readonly("width", &sdm::Keyframe::width)
      .def_property_readonly("height", &sdm::Keyframe::height)
      .def_readwrite("pose", &sdm::Keyframe::pose)
      .def_property_readonly(
          "image", [](const sdm::Keyframe& kf) { return array_from_image(kf.image); })
      .def("idepth",
           [](const sdm::Keyframe& kf, bool smoothed) {
             return field_array<float>(kf, [&](const sdm::DepthHypothesis& h) {
               return smoothed ? h.idepth_smoothed : h.idepth;
             });
           },
           py::arg("smoothed") = true)
      .def("variance",
           [](const sdm::Keyframe& kf, bool smoothed) {
             return field_array<float>(kf, [&](const sdm::DepthHypothesis& h) {
               return smoothed ? h.variance_smoothed : h.variance;
             });
           },
           py::arg("smoothed") = true)
      .def("valid_mask",
           [](const sdm::Keyframe& kf) {
             return field_array<bool>(kf, [](const sdm::DepthHypothesis& h) {
               return h.valid();
             });
           })
      .def("blacklisted_mask",
           [](const sdm::Keyframe& kf) {
             return field_array<bool>(kf, [](const sdm::DepthHypothesis& h) {
               return h.blacklisted();
             });
           })
      .def("reset_hypotheses", &sdm::Keyframe::reset_hypotheses)
      .def("serialize", [](const sdm::Keyframe& kf) {
        const std::vector<std::uint8_t> bytes = sdm::serialize(kf);
        return py::bytes(reinterpret_cast<const char*>(bytes.data()),
                         bytes.size());
      });

  m.def("deserialize", [](const py::bytes& data) {
    const std::string_view view = data;
    return sdm::deserialize(std::span<const std::uint8_t>(
        reinterpret_cast<const std::uint8_t*>(view.data()), view.size()));
  });
  m.def("save_keyframe", &sdm::save_keyframe, py::arg("keyframe"),
        py::arg("path"));
  m.def("load_keyframe", &sdm::load_keyframe, py::arg("path"));

  py::class_<sdm::UpdateTrace>(m, "UpdateTrace")
      .def_readonly("width", &sdm::UpdateTrace::width)
      .def_readonly("height", &sdm::UpdateTrace::height)
      .def("verdicts",
           [](const sdm::UpdateTrace& t) {
             py::array_t<std::uint8_t> out({t.height, t.width});
             std::uint8_t* dst = out.mutable_data();
             for (const sdm::TraceEntry& e : t.entries)
               *dst++ = static_cast<std::uint8_t>(e.verdict);
             return out;
           })
      .def("steps", [](const sdm::UpdateTrace& t) {
        py::array_t<std::uint16_t> out({t.height, t.width});
        std::uint16_t* dst = out.mutable_data();
        for (const sdm::TraceEntry& e : t.entries) *dst++ = e.steps;
        return out;
      });

  m.def(
      "update_map",
      [](sdm::Keyframe& kf,
         const py::array_t<std::uint8_t,
                           py::array::c_style | py::array::forcecast>& current,
         const sdm::Pose& rel_pose, const sdm::CameraIntrinsics& k,
         const sdm::MapUpdateParams& params) {
        const sdm::Image8 frame = image_from_array(current);
        py::gil_scoped_release release;
        return sdm::update_map(kf, frame, rel_pose, k, params);
      },
      py::arg("keyframe"), py::arg("current"), py::arg("rel_pose"),
      py::arg("intrinsics"), py::arg("params") = sdm::MapUpdateParams{});

  m.def("hole_fill", &sdm::hole_fill, py::arg("keyframe"),
        py::arg("params") = sdm::FilterParams{});
  m.def("smooth", &sdm::smooth, py::arg("keyframe"),
        py::arg("params") = sdm::FilterParams{});
  m.def("write_trace_csv", &sdm::write_trace_csv, py::arg("trace"),
        py::arg("path"));
  m.def("read_trace_csv", &sdm::read_trace_csv, py::arg("path"));

  m.def(
      "triangulate_inverse_depth",
      [](const Eigen::Vector2d& keypoint, const Eigen::Vector2d& matched,
         const sdm::Pose& rel_pose, const sdm::CameraIntrinsics& k) {
        const sdm::TriangulationResult r =
            sdm::triangulate_inverse_depth(keypoint, matched, rel_pose, k);
        return py::make_tuple(r.ok(), r.idepth);
      },
      py::arg("keypoint"), py::arg("matched"), py::arg("rel_pose"),
      py::arg("intrinsics"),
      "Returns (ok, inverse_depth) for a matched pixel pair.");

  py::class_<sdm::PipelineConfig>(m, "PipelineConfig")
      .def(py::init<>())
      .def_readwrite("slow_rate", &sdm::PipelineConfig::slow_rate)
      .def_readwrite("scan_cost", &sdm::PipelineConfig::scan_cost)
      .def_readwrite("skip_cost", &sdm::PipelineConfig::skip_cost)
      .def_readwrite("init_cost", &sdm::PipelineConfig::init_cost)
      .def_readwrite("fifo_depth", &sdm::PipelineConfig::fifo_depth)
      .def_readwrite("clock_mhz", &sdm::PipelineConfig::clock_mhz)
      .def_readwrite("mem_bandwidth", &sdm::PipelineConfig::mem_bandwidth)
      .def_readwrite("parallelism", &sdm::PipelineConfig::parallelism);

  py::class_<sdm::FrameWorkload>(m, "FrameWorkload")
      .def(py::init([](const py::array_t<std::uint16_t, py::array::c_style |
                                                            py::array::forcecast>&
                           points) {
             if (points.ndim() != 2)
               throw std::invalid_argument("expected a 2-D uint16 array");
             sdm::FrameWorkload w;
             w.height = static_cast<int>(points.shape(0));
             w.width = static_cast<int>(points.shape(1));
             w.points.assign(points.data(), points.data() + points.size());
             return w;
           }),
           py::arg("points"))
      .def_readonly("width", &sdm::FrameWorkload::width)
      .def_readonly("height", &sdm::FrameWorkload::height)
      .def_property_readonly("points", [](const sdm::FrameWorkload& w) {
        py::array_t<std::uint16_t> out({w.height, w.width});
        std::memcpy(out.mutable_data(), w.points.data(),
                    w.points.size() * sizeof(std::uint16_t));
        return out;
      });

  m.def("workload_from_trace", &sdm::workload_from_trace, py::arg("trace"));

  py::class_<sdm::SimReport>(m, "SimReport")
      .def_readonly("total_cycles", &sdm::SimReport::total_cycles)
      .def_readonly("points", &sdm::SimReport::points)
      .def_property_readonly(
          "busy_cycles",
          [](const sdm::SimReport& r) {
            return py::make_tuple(r.busy_cycles[0], r.busy_cycles[1],
                                  r.busy_cycles[2]);
          })
      .def_property_readonly(
          "stall_cycles",
          [](const sdm::SimReport& r) {
            return py::make_tuple(r.stall_cycles[0], r.stall_cycles[1],
                                  r.stall_cycles[2]);
          })
      .def_property_readonly("fifo_peak", [](const sdm::SimReport& r) {
        return py::make_tuple(r.fifo_peak[0], r.fifo_peak[1]);
      });

  m.def(
      "simulate_frame",
      [](const sdm::FrameWorkload& workload, const sdm::PipelineConfig& config) {
        py::gil_scoped_release release;
        return sdm::simulate_frame(workload, config);
      },
      py::arg("workload"), py::arg("config") = sdm::PipelineConfig{});

  m.def(
      "analytic_row_cycles",
      [](const py::array_t<std::uint16_t,
                           py::array::c_style | py::array::forcecast>& row,
         const sdm::PipelineConfig& config) {
        return sdm::analytic_row_cycles(
            std::span<const std::uint16_t>(row.data(),
                                           static_cast<std::size_t>(row.size())),
            config);
      },
      py::arg("row"), py::arg("config") = sdm::PipelineConfig{});

  py::class_<sdm::FrameTime>(m, "FrameTime")
      .def_readonly("compute_ms", &sdm::FrameTime::compute_ms)
      .def_readonly("memory_ms", &sdm::FrameTime::memory_ms)
      .def_readonly("total_ms", &sdm::FrameTime::total_ms);

  m.def("frame_time_ms", &sdm::frame_time_ms, py::arg("sim"), py::arg("config"),
        py::arg("frame_bytes"), py::arg("map_bytes"), py::arg("overlap") = true);

  py::class_<sdm::TuneResult>(m, "TuneResult")
      .def_readonly("feasible", &sdm::TuneResult::feasible)
      .def_readonly("config", &sdm::TuneResult::config)
      .def_readonly("p99_ms", &sdm::TuneResult::p99_ms);

  m.def(
      "tune_rates",
      [](double target_fps, const std::vector<sdm::FrameWorkload>& frames,
         double clock_mhz, const sdm::PipelineConfig& base) {
        py::gil_scoped_release release;
        return sdm::tune_rates(target_fps, frames, clock_mhz, base);
      },
      py::arg("target_fps"), py::arg("frames"), py::arg("clock_mhz"),
      py::arg("base") = sdm::PipelineConfig{});

  py::class_<sdm::WorkloadStats>(m, "WorkloadStats")
      .def_readonly("width", &sdm::WorkloadStats::width)
      .def_readonly("height", &sdm::WorkloadStats::height)
      .def_readonly("scan_count", &sdm::WorkloadStats::scan_count)
      .def_readonly("point_count", &sdm::WorkloadStats::point_count)
      .def_readonly("mean_steps", &sdm::WorkloadStats::mean_steps)
      .def_readonly("p50_steps", &sdm::WorkloadStats::p50_steps)
      .def_readonly("p98_steps", &sdm::WorkloadStats::p98_steps)
      .def_readonly("max_steps", &sdm::WorkloadStats::max_steps)
      .def_property_readonly(
          "scan_frequency",
          [](const sdm::WorkloadStats& s) {
            py::array_t<double> out({s.height, s.width});
            std::memcpy(out.mutable_data(), s.scan_frequency.data(),
                        s.scan_frequency.size() * sizeof(double));
            return out;
          })
      .def_property_readonly("row_profile", [](const sdm::WorkloadStats& s) {
        py::array_t<double> out(static_cast<py::ssize_t>(s.row_profile.size()));
        std::memcpy(out.mutable_data(), s.row_profile.data(),
                    s.row_profile.size() * sizeof(double));
        return out;
      });

  m.def("scan_frequency_heatmap", &sdm::scan_frequency_heatmap,
        py::arg("traces"));

  m.def("load_image",
        [](const std::string& path) { return array_from_image(sdm::load_image(path)); },
        py::arg("path"));
  m.def("load_intrinsics", &sdm::load_intrinsics, py::arg("path"));
}
