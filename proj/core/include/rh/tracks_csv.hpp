#pragma once

#include <string>
#include <string_view>

#include "rh/scenario.hpp"

namespace rh {

// highD-style ingestion. The tracks file needs the columns
//   frame,id,x,y,width,height,xVelocity,yVelocity,xAcceleration,
//   yAcceleration,laneId
// where (x, y) is the upper-left bounding-box corner in a y-down image frame,
// width is the extent along x and height the extent along y. The meta file
// carries frameRate (default 25) and the semicolon-separated y positions of
// upperLaneMarkings / lowerLaneMarkings; optional xMin, xMax bound the road.
//
// Lane ids follow highD numbering: the lane between upper markings i and
// i+1 gets id i+2, the lane between lower markings j and j+1 gets
// id (#upper markings)+2+j. Upper lanes travel towards -x.
//
// Grid step k of the returned scenario is frame k of the file; positions
// stay in the file's frame (converted to box centres).
Scenario parse_tracks_csv(std::string_view meta_text, std::string_view tracks_text);

std::string write_tracks_csv(const Scenario& scenario);
std::string write_meta_csv(const Scenario& scenario);

}  // namespace rh
