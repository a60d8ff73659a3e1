// Lebedev-Laikov octahedral rules on the unit sphere.
//
// Orbit generators and weights transcribed from the Lebedev-Laikov tables
// (V.I. Lebedev and D.N. Laikov, "A quadrature formula for the sphere of the
// 131st algebraic order of accuracy", Doklady Mathematics 59 (1999) 477-481),
// as distributed with the public-domain sphere_lebedev_rule code.
// Weights are normalized to sum to one.
#pragma once

#include <array>
#include <span>

namespace stokesmor::lebedev {

/// Orbit kinds of the octahedral group, matching the reference generator names
/// gen_oh1 .. gen_oh6.
enum class Orbit { a1, a2, a3, bk, ck, dk };

struct OrbitEntry {
  Orbit kind;
  double weight;
  double a;
  double b;
};

struct Rule {
  int degree;
  int points;
  std::span<const OrbitEntry> orbits;
};

namespace tables {

inline constexpr std::array<OrbitEntry, 4> ld0050{{
    {Orbit::a1, .01269841269841270, 0, 0},
    {Orbit::a2, .02257495590828924, 0, 0},
    {Orbit::a3, .02109375000000000, 0, 0},
    {Orbit::bk, .02017333553791887, .3015113445777636, 0},
}};
inline constexpr std::array<OrbitEntry, 5> ld0074{{
    {Orbit::a1, .00051306717973385, 0, 0},
    {Orbit::a2, .01660406956574204, 0, 0},
    {Orbit::a3, -.02958603896103896, 0, 0},
    {Orbit::bk, .02657620708215946, .4803844614152614, 0},
    {Orbit::ck, .01652217099371571, .3207726489807764, 0},
}};
inline constexpr std::array<OrbitEntry, 5> ld0086{{
    {Orbit::a1, .01154401154401154, 0, 0},
    {Orbit::a3, .01194390908585628, 0, 0},
    {Orbit::bk, .01111055571060340, .3696028464541502, 0},
    {Orbit::bk, .01187650129453714, .6943540066026664, 0},
    {Orbit::ck, .01181230374690448, .3742430390903412, 0},
}};
inline constexpr std::array<OrbitEntry, 6> ld0110{{
    {Orbit::a1, .003828270494937162, 0, 0},
    {Orbit::a3, .009793737512487512, 0, 0},
    {Orbit::bk, .008211737283191111, .1851156353447362, 0},
    {Orbit::bk, .009942814891178103, .6904210483822922, 0},
    {Orbit::bk, .009595471336070963, .3956894730559419, 0},
    {Orbit::ck, .009694996361663028, .4783690288121502, 0},
}};
inline constexpr std::array<OrbitEntry, 7> ld0146{{
    {Orbit::a1, .5996313688621381E-3, 0, 0},
    {Orbit::a2, .7372999718620756E-2, 0, 0},
    {Orbit::a3, .7210515360144488E-2, 0, 0},
    {Orbit::bk, .7116355493117555E-2, .6764410400114264, 0},
    {Orbit::bk, .6753829486314477E-2, .4174961227965453, 0},
    {Orbit::bk, .7574394159054034E-2, .1574676672039082, 0},
    {Orbit::dk, .6991087353303262E-2, .1403553811713183, .4493328323269557},
}};
inline constexpr std::array<OrbitEntry, 8> ld0170{{
    {Orbit::a1, .5544842902037365E-2, 0, 0},
    {Orbit::a2, .6071332770670752E-2, 0, 0},
    {Orbit::a3, .6383674773515093E-2, 0, 0},
    {Orbit::bk, .5183387587747790E-2, .2551252621114134, 0},
    {Orbit::bk, .6317929009813725E-2, .6743601460362766, 0},
    {Orbit::bk, .6201670006589077E-2, .4318910696719410, 0},
    {Orbit::ck, .5477143385137348E-2, .2613931360335988, 0},
    {Orbit::dk, .5968383987681156E-2, .4990453161796037, .1446630744325115},
}};
inline constexpr std::array<OrbitEntry, 9> ld0194{{
    {Orbit::a1, .1782340447244611E-2, 0, 0},
    {Orbit::a2, .5716905949977102E-2, 0, 0},
    {Orbit::a3, .5573383178848738E-2, 0, 0},
    {Orbit::bk, .5608704082587997E-2, .6712973442695226, 0},
    {Orbit::bk, .5158237711805383E-2, .2892465627575439, 0},
    {Orbit::bk, .5518771467273614E-2, .4446933178717437, 0},
    {Orbit::bk, .4106777028169394E-2, .1299335447650067, 0},
    {Orbit::ck, .5051846064614808E-2, .3457702197611283, 0},
    {Orbit::dk, .5530248916233094E-2, .1590417105383530, .8360360154824589},
}};
inline constexpr std::array<OrbitEntry, 10> ld0230{{
    {Orbit::a1, -.5522639919727325E-1, 0, 0},
    {Orbit::a3, .4450274607445226E-2, 0, 0},
    {Orbit::bk, .4496841067921404E-2, .4492044687397611, 0},
    {Orbit::bk, .5049153450478750E-2, .2520419490210201, 0},
    {Orbit::bk, .3976408018051883E-2, .6981906658447242, 0},
    {Orbit::bk, .4401400650381014E-2, .6587405243460960, 0},
    {Orbit::bk, .1724544350544401E-1, .0403854405009766, 0},
    {Orbit::ck, .4231083095357343E-2, .5823842309715584, 0},
    {Orbit::ck, .5198069864064399E-2, .3545877390518688, 0},
    {Orbit::dk, .4695720972568883E-2, .2272181808998187, .4864661535886647},
}};
inline constexpr std::array<OrbitEntry, 11> ld0266{{
    {Orbit::a1, -.1313769127326952E-2, 0, 0},
    {Orbit::a2, -.2522728704859336E-2, 0, 0},
    {Orbit::a3, .4186853881700583E-2, 0, 0},
    {Orbit::bk, .5315167977810885E-2, .7039373391585475, 0},
    {Orbit::bk, .4047142377086219E-2, .1012526248572414, 0},
    {Orbit::bk, .4112482394406990E-2, .4647448726420539, 0},
    {Orbit::bk, .3595584899758782E-2, .3277420654971629, 0},
    {Orbit::bk, .4256131351428158E-2, .6620338663699974, 0},
    {Orbit::ck, .4229582700647240E-2, .8506508083520399, 0},
    {Orbit::dk, .4080914225780505E-2, .3233484542692899, .1153112011009701},
    {Orbit::dk, .4071467593830964E-2, .2314790158712601, .5244939240922365},
}};
inline constexpr std::array<OrbitEntry, 12> ld0302{{
    {Orbit::a1, .8545911725128148E-3, 0, 0},
    {Orbit::a3, .3599119285025571E-2, 0, 0},
    {Orbit::bk, .3449788424305883E-2, .3515640345570105, 0},
    {Orbit::bk, .3604822601419882E-2, .6566329410219612, 0},
    {Orbit::bk, .3576729661743367E-2, .4729054132581005, 0},
    {Orbit::bk, .2352101413689164E-2, .0961830852261478, 0},
    {Orbit::bk, .3108953122413675E-2, .2219645236294178, 0},
    {Orbit::bk, .3650045807677255E-2, .7011766416089545, 0},
    {Orbit::ck, .2982344963171804E-2, .2644152887060663, 0},
    {Orbit::ck, .3600820932216460E-2, .5718955891878961, 0},
    {Orbit::dk, .3571540554273387E-2, .2510034751770465, .8000727494073951},
    {Orbit::dk, .3392312205006170E-2, .1233548532583327, .4127724083168531},
}};
inline constexpr std::array<OrbitEntry, 16> ld0434{{
    {Orbit::a1, .5265897968224436E-3, 0, 0},
    {Orbit::a2, .2548219972002607E-2, 0, 0},
    {Orbit::a3, .2512317418927307E-2, 0, 0},
    {Orbit::bk, .2530403801186355E-2, .6909346307509111, 0},
    {Orbit::bk, .2014279020918528E-2, .1774836054609158, 0},
    {Orbit::bk, .2501725168402936E-2, .4914342637784746, 0},
    {Orbit::bk, .2513267174597564E-2, .6456664707424256, 0},
    {Orbit::bk, .2302694782227416E-2, .2861289010307638, 0},
    {Orbit::bk, .1462495621594614E-2, .0756808436717802, 0},
    {Orbit::bk, .2445373437312980E-2, .3927259763368002, 0},
    {Orbit::ck, .2417442375638981E-2, .8818132877794288, 0},
    {Orbit::ck, .1910951282179532E-2, .9776428111182649, 0},
    {Orbit::dk, .2416930044324775E-2, .2054823696403044, .8689460322872412},
    {Orbit::dk, .2512236854563495E-2, .5905157048925271, .7999278543857286},
    {Orbit::dk, .2496644054553086E-2, .5550152361076807, .7717462626915901},
    {Orbit::dk, .2236607760437849E-2, .9371809858553722, .3344363145343455},
}};
}  // namespace tables

inline constexpr std::array<Rule, 11> kRules{{
    {11, 50, tables::ld0050},
    {13, 74, tables::ld0074},
    {15, 86, tables::ld0086},
    {17, 110, tables::ld0110},
    {19, 146, tables::ld0146},
    {21, 170, tables::ld0170},
    {23, 194, tables::ld0194},
    {25, 230, tables::ld0230},
    {27, 266, tables::ld0266},
    {29, 302, tables::ld0302},
    {35, 434, tables::ld0434},
}};

}  // namespace stokesmor::lebedev
