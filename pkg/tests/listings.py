"""Model listings used across the tests.

The GPA and Scale texts are the published listings with line numbers removed.
The aircraft listing elides its data and never defines radar positions or
ranges, so ``AIRCRAFT_WITH_DATA`` adds those tables and splices in two readings.
"""

GPA_LISTING = """\
Type Applicant, Country;
distinct Country NewZealand, India, USA;
#Applicant(Nationality = c) ~
 if (c==USA) then Poisson(50)
 else Poisson(5);
origin Country Nationality(Applicant);
random Real GPA(Applicant s) ~
 if Nationality(s) == USA then
     Mix({ TruncatedGauss(3, 1, 0, 4) -> 0.9998,
         4 -> 0.0001, 0 -> 0.0001})
else Mix({ TruncatedGauss(5, 4, 0, 10) -> 0.989,
          10 -> 0.009, 0 -> 0.002});
random Applicant David ~ 
    UniformChoice({a for Applicant a});
obs GPA(David) = 4;
query Nationality(David) = USA;
"""

SCALE_LISTING = """\
fixed Real sigma = 1.0; // stddev of observation
random Real FakeCoinDiff ~
 TruncatedGaussian(0.5, 1, 0.1, 1);
random Bool hasFakeCoin ~ BooleanDistrib(0.5);
random Real obsDiff ~ if hasFakeCoin 
  then Gaussian(FakeCoinDiff, sigma*sigma)
  else Mix({ 0 -> 1.0 });
obs obsDiff = 0;
query hasFakeCoin;
"""

AIRCRAFT_ELIDED = """\
type t_radar; distinct t_radar R[6];
// model aircraft movement
random Real X(Timestep t) ~ if t == @0 
  then Gaussian(2, 1) else Gaussian(X(prev(t)), 4);
random Real Y(Timestep t) ~ if t == @0 
  then Gaussian(-1, 1) else Gaussian(Y(prev(t)), 4);
// observation model of radars
random Real obs_dist(Timestep t, t_radar r) ~
  if dist(X(t),Y(t),r) > radius(r) then
    mixed({radius(r)->0.999,
   	TruncatedGauss(radius(r),0.01,0,radius(r))->0.001})
  else
    TruncatedGauss(dist(X(t),Y(t),r),0.01,0,radius(r));
// observation and query
obs obs_dist(@0, R[0]) = ...;
... // evidence numbers omitted
query X(t) for Timestep t;
query Y(t) for Timestep t;
"""

TABLES = """\
fixed Real pos_x(t_radar r) = {R[0] -> 0.0, R[1] -> 3.0, R[2] -> 6.0, R[3] -> 0.0, R[4] -> 3.0, R[5] -> 6.0};
fixed Real pos_y(t_radar r) = {R[0] -> 0.0, R[1] -> 0.0, R[2] -> 0.0, R[3] -> 4.0, R[4] -> 4.0, R[5] -> 4.0};
fixed Real radius(t_radar r) = {R[0] -> 5.0, R[1] -> 5.0, R[2] -> 5.0, R[3] -> 5.0, R[4] -> 5.0, R[5] -> 5.0};
"""

DATA = """\
obs obs_dist(@0, R[0]) = 2.3;
obs obs_dist(@0, R[2]) = 5.0;
"""


def _splice(listing):
    head, _, rest = listing.partition("// model aircraft movement")
    body = "// model aircraft movement" + rest
    body = body.replace("obs obs_dist(@0, R[0]) = ...;\n", DATA)
    body = body.replace("... // evidence numbers omitted\n", "")
    return head + TABLES + body


AIRCRAFT_WITH_DATA = _splice(AIRCRAFT_ELIDED)
