// SPDX-License-Identifier: Apache-2.0
#include "ledit/checkpoint.hpp"

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "json.hpp"
#include "ledit/image_io.hpp"

namespace ledit {

using nlohmann::json;

namespace {

void write_f32_block(std::ofstream& out, const Eigen::ArrayXd& arr) {
  std::vector<float> buf(static_cast<std::size_t>(arr.size()));
  for (Eigen::Index i = 0; i < arr.size(); ++i) buf[static_cast<std::size_t>(i)] = static_cast<float>(arr[i]);
  out.write(reinterpret_cast<const char*>(buf.data()),
            static_cast<std::streamsize>(buf.size() * sizeof(float)));
}

void read_f32_block(std::ifstream& in, Eigen::ArrayXd& arr, Eigen::Index n) {
  std::vector<float> buf(static_cast<std::size_t>(n));
  in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size() * sizeof(float)));
  if (!in) throw std::runtime_error("field checkpoint: truncated data blob");
  arr.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) arr[i] = static_cast<double>(buf[static_cast<std::size_t>(i)]);
}

json camera_to_json(const Camera& cam) {
  json j;
  j["fx"] = cam.fx;
  j["fy"] = cam.fy;
  j["cx"] = cam.cx;
  j["cy"] = cam.cy;
  j["width"] = cam.width;
  j["height"] = cam.height;
  j["rotation"] = std::vector<double>(cam.rotation.data(), cam.rotation.data() + 9);  // column-major
  j["center"] = {cam.center.x(), cam.center.y(), cam.center.z()};
  j["near"] = cam.near;
  j["far"] = cam.far;
  return j;
}

Camera camera_from_json(const json& j) {
  Camera cam;
  cam.fx = j.at("fx").get<double>();
  cam.fy = j.at("fy").get<double>();
  cam.cx = j.at("cx").get<double>();
  cam.cy = j.at("cy").get<double>();
  cam.width = j.at("width").get<int>();
  cam.height = j.at("height").get<int>();
  const auto rot = j.at("rotation").get<std::vector<double>>();
  if (rot.size() != 9) throw std::runtime_error("camera: rotation must have 9 entries");
  cam.rotation = Eigen::Map<const Eigen::Matrix3d>(rot.data());
  const auto ctr = j.at("center").get<std::vector<double>>();
  if (ctr.size() != 3) throw std::runtime_error("camera: center must have 3 entries");
  cam.center = Eigen::Vector3d(ctr[0], ctr[1], ctr[2]);
  cam.near = j.at("near").get<double>();
  cam.far = j.at("far").get<double>();
  cam.validate();
  return cam;
}

}  // namespace

void save_field(const std::string& prefix, const VoxelField& field) {
  json header;
  header["dims"] = {field.dims.x(), field.dims.y(), field.dims.z()};
  header["bbox"] = {{"min", {field.bbox_min.x(), field.bbox_min.y(), field.bbox_min.z()}},
                    {"max", {field.bbox_max.x(), field.bbox_max.y(), field.bbox_max.z()}}};
  header["channels"] = {"density_raw", "color_raw", "relevance_raw"};
  header["dtype"] = "float32";
  header["endianness"] = "little";
  header["data_file"] = std::filesystem::path(prefix + ".f32").filename().string();
  header["fit_steps"] = field.fit_steps;
  header["geometry_ready"] = field.geometry_ready;
  write_text_file(prefix + ".json", header.dump(2) + "\n");

  std::ofstream out(prefix + ".f32", std::ios::binary);
  if (!out) throw std::runtime_error("cannot write file: " + prefix + ".f32");
  write_f32_block(out, field.density_raw);
  write_f32_block(out, field.color_raw);
  write_f32_block(out, field.relevance_raw);
}

VoxelField load_field(const std::string& prefix) {
  const json header = json::parse(read_text_file(prefix + ".json"));
  const auto dims = header.at("dims").get<std::vector<int>>();
  const auto bbox_min = header.at("bbox").at("min").get<std::vector<double>>();
  const auto bbox_max = header.at("bbox").at("max").get<std::vector<double>>();
  if (dims.size() != 3 || bbox_min.size() != 3 || bbox_max.size() != 3)
    throw std::runtime_error("field checkpoint: malformed header");
  if (header.at("dtype").get<std::string>() != "float32" ||
      header.at("endianness").get<std::string>() != "little")
    throw std::runtime_error("field checkpoint: unsupported data encoding");

  VoxelField field = VoxelField::make(Eigen::Vector3i(dims[0], dims[1], dims[2]),
                                      Eigen::Vector3d(bbox_min[0], bbox_min[1], bbox_min[2]),
                                      Eigen::Vector3d(bbox_max[0], bbox_max[1], bbox_max[2]));
  field.fit_steps = header.value("fit_steps", std::int64_t{0});
  field.geometry_ready = header.value("geometry_ready", false);

  const std::string data_path =
      (std::filesystem::path(prefix).parent_path() / header.at("data_file").get<std::string>()).string();
  std::ifstream in(data_path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open file: " + data_path);
  read_f32_block(in, field.density_raw, field.voxels());
  read_f32_block(in, field.color_raw, 3 * field.voxels());
  read_f32_block(in, field.relevance_raw, field.voxels());
  return field;
}

void save_cameras(const std::string& path, const std::vector<Camera>& cams) {
  json j;
  j["cameras"] = json::array();
  for (const Camera& cam : cams) j["cameras"].push_back(camera_to_json(cam));
  write_text_file(path, j.dump(2) + "\n");
}

std::vector<Camera> load_cameras(const std::string& path) {
  const json j = json::parse(read_text_file(path));
  std::vector<Camera> cams;
  for (const auto& cj : j.at("cameras")) cams.push_back(camera_from_json(cj));
  return cams;
}

void save_captures(const std::string& dir, const std::vector<PosedImage>& views) {
  std::filesystem::create_directories(dir);
  std::vector<Camera> cams;
  cams.reserve(views.size());
  for (std::size_t i = 0; i < views.size(); ++i) {
    cams.push_back(views[i].cam);
    std::ostringstream name;
    name << "view_" << std::setw(3) << std::setfill('0') << i << ".png";
    write_png((std::filesystem::path(dir) / name.str()).string(), views[i].image);
  }
  save_cameras((std::filesystem::path(dir) / "cameras.json").string(), cams);
}

std::vector<PosedImage> load_captures(const std::string& dir) {
  const auto cams = load_cameras((std::filesystem::path(dir) / "cameras.json").string());
  std::vector<PosedImage> views;
  views.reserve(cams.size());
  for (std::size_t i = 0; i < cams.size(); ++i) {
    std::ostringstream name;
    name << "view_" << std::setw(3) << std::setfill('0') << i << ".png";
    views.push_back(PosedImage{cams[i], read_png((std::filesystem::path(dir) / name.str()).string())});
  }
  return views;
}

}  // namespace ledit
