#include <algorithm>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>
#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include "siqa/evaluation.hpp"

namespace siqa {

namespace {

struct TrendPoint {
    int epoch;
    double srocc;
    double accuracy;
};

std::vector<TrendPoint> read_trend(const std::filesystem::path& report_jsonl) {
    std::ifstream in(report_jsonl);
    if (!in) throw IoError("cannot open " + report_jsonl.string());
    std::vector<TrendPoint> points;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const nlohmann::json j = nlohmann::json::parse(line);
        points.push_back({j.at("epoch").get<int>(), j.at("val_srocc").get<double>(),
                          j.at("val_scene_accuracy").get<double>()});
    }
    if (points.empty()) throw IoError("no epoch records in " + report_jsonl.string());
    return points;
}

}  // namespace

void render_training_plot(const std::filesystem::path& report_jsonl,
                          const std::filesystem::path& out_png) {
    const auto points = read_trend(report_jsonl);

    const int width = 960, height = 600;
    const int left = 70, right = 30, top = 50, bottom = 60;
    cv::Mat canvas(height, width, CV_8UC3, cv::Scalar(255, 255, 255));

    double y_min = 0.0, y_max = 1.0;
    for (const auto& p : points) {
        y_min = std::min({y_min, p.srocc, p.accuracy});
        y_max = std::max({y_max, p.srocc, p.accuracy});
    }
    y_min = std::floor(y_min * 5.0) / 5.0;
    y_max = std::ceil(y_max * 5.0) / 5.0;
    if (y_max <= y_min) y_max = y_min + 1.0;

    const int max_epoch = points.back().epoch;
    const int plot_w = width - left - right, plot_h = height - top - bottom;
    auto px = [&](double epoch) {
        return left + static_cast<int>(plot_w * (epoch - 1) / std::max(1, max_epoch - 1));
    };
    auto py = [&](double v) {
        return top + static_cast<int>(plot_h * (1.0 - (v - y_min) / (y_max - y_min)));
    };

    const cv::Scalar axis(60, 60, 60), grid(220, 220, 220);
    const cv::Scalar srocc_color(180, 90, 20), acc_color(40, 40, 200);  // BGR

    for (double v = y_min; v <= y_max + 1e-9; v += 0.2) {
        cv::line(canvas, {left, py(v)}, {width - right, py(v)}, grid, 1);
        char label[16];
        std::snprintf(label, sizeof(label), "%.1f", v);
        cv::putText(canvas, label, {8, py(v) + 4}, cv::FONT_HERSHEY_SIMPLEX, 0.45, axis, 1);
    }
    cv::rectangle(canvas, {left, top}, {width - right, height - bottom}, axis, 1);

    const int tick_step = std::max(1, max_epoch / 10);
    for (int e = 1; e <= max_epoch; e += tick_step) {
        cv::line(canvas, {px(e), height - bottom}, {px(e), height - bottom + 5}, axis, 1);
        cv::putText(canvas, std::to_string(e), {px(e) - 8, height - bottom + 22},
                    cv::FONT_HERSHEY_SIMPLEX, 0.45, axis, 1);
    }

    auto draw_series = [&](auto getter, const cv::Scalar& color) {
        for (std::size_t i = 0; i + 1 < points.size(); ++i)
            cv::line(canvas, {px(points[i].epoch), py(getter(points[i]))},
                     {px(points[i + 1].epoch), py(getter(points[i + 1]))}, color, 2);
        for (const auto& p : points)
            cv::circle(canvas, {px(p.epoch), py(getter(p))}, 3, color, cv::FILLED);
    };
    draw_series([](const TrendPoint& p) { return p.srocc; }, srocc_color);
    draw_series([](const TrendPoint& p) { return p.accuracy; }, acc_color);

    cv::putText(canvas, "validation SROCC", {left + 10, top - 28}, cv::FONT_HERSHEY_SIMPLEX, 0.5,
                srocc_color, 1);
    cv::putText(canvas, "scene detection accuracy", {left + 180, top - 28},
                cv::FONT_HERSHEY_SIMPLEX, 0.5, acc_color, 1);
    cv::putText(canvas, "epoch", {width / 2 - 20, height - 15}, cv::FONT_HERSHEY_SIMPLEX, 0.5,
                axis, 1);

    if (!cv::imwrite(out_png.string(), canvas))
        throw IoError("cannot write plot " + out_png.string());
}

}  // namespace siqa
