//! Built-in meshes.

use std::f64::consts::PI;

use super::mesh::{BoundaryEdge, Mesh2D};

/// `[0, width] x [0, height]` split into `kx * ky` cells, two triangles each.
/// Boundary tags: `bottom`, `right`, `top`, `left`.
pub fn rectangle(width: f64, height: f64, kx: usize, ky: usize) -> Mesh2D {
    assert!(kx >= 1 && ky >= 1, "at least one cell per direction");
    let id = |i: usize, j: usize| j * (kx + 1) + i;
    let mut mesh = Mesh2D::default();
    for j in 0..=ky {
        for i in 0..=kx {
            mesh.vertices.push([
                width * i as f64 / kx as f64,
                height * j as f64 / ky as f64,
            ]);
        }
    }
    for j in 0..ky {
        for i in 0..kx {
            let (a, b, c, d) = (id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1));
            mesh.triangles.push([a, b, c]);
            mesh.triangles.push([a, c, d]);
        }
    }
    let mut edge = |a: usize, b: usize, tag: &str| {
        mesh.boundary_edges.push(BoundaryEdge {
            vertices: [a, b],
            tag: tag.to_string(),
        })
    };
    for i in 0..kx {
        edge(id(i, 0), id(i + 1, 0), "bottom");
    }
    for j in 0..ky {
        edge(id(kx, j), id(kx, j + 1), "right");
    }
    for i in (0..kx).rev() {
        edge(id(i + 1, ky), id(i, ky), "top");
    }
    for j in (0..ky).rev() {
        edge(id(0, j + 1), id(0, j), "left");
    }
    mesh
}

/// Unit square with a uniform `k x k` grid.
pub fn unit_square(k: usize) -> Mesh2D {
    rectangle(1.0, 1.0, k, k)
}

/// `[0, 2]^2` minus `(1, 2]^2`, with `k x k` cells per unit square.
///
/// Tags: `bottom` (y = 0), `right_low` (x = 2), `top_low` (y = 1, x > 1),
/// `right_high` (x = 1, y > 1), `top` (y = 2), `left` (x = 0).
pub fn l_shape(k: usize) -> Mesh2D {
    assert!(k >= 1);
    let n = 2 * k;
    let h = 1.0 / k as f64;
    let inside = |i: usize, j: usize| !(i >= k && j >= k);
    let mut index = vec![vec![usize::MAX; n + 1]; n + 1];
    let mut mesh = Mesh2D::default();
    for j in 0..=n {
        for i in 0..=n {
            if i <= k || j <= k {
                index[j][i] = mesh.vertices.len();
                mesh.vertices.push([i as f64 * h, j as f64 * h]);
            }
        }
    }
    for j in 0..n {
        for i in 0..n {
            if !inside(i, j) {
                continue;
            }
            let (a, b, c, d) = (index[j][i], index[j][i + 1], index[j + 1][i + 1], index[j + 1][i]);
            mesh.triangles.push([a, b, c]);
            mesh.triangles.push([a, c, d]);
        }
    }
    let mut edge = |a: usize, b: usize, tag: &str| {
        mesh.boundary_edges.push(BoundaryEdge {
            vertices: [a, b],
            tag: tag.to_string(),
        })
    };
    for i in 0..n {
        edge(index[0][i], index[0][i + 1], "bottom");
    }
    for j in 0..k {
        edge(index[j][n], index[j + 1][n], "right_low");
    }
    for i in (k..n).rev() {
        edge(index[k][i + 1], index[k][i], "top_low");
    }
    for j in k..n {
        edge(index[j][k], index[j + 1][k], "right_high");
    }
    for i in (0..k).rev() {
        edge(index[n][i + 1], index[n][i], "top");
    }
    for j in (0..n).rev() {
        edge(index[j + 1][0], index[j][0], "left");
    }
    mesh
}

/// Regular `sides`-gon inscribed in the circle of the given radius, fanned
/// from the center. Edge `i` is tagged `s<i>`.
pub fn disk_polygon(radius: f64, sides: usize) -> Mesh2D {
    assert!(sides >= 3);
    let mut mesh = Mesh2D::default();
    mesh.vertices.push([0.0, 0.0]);
    for i in 0..sides {
        let t = 2.0 * PI * i as f64 / sides as f64;
        mesh.vertices.push([radius * t.cos(), radius * t.sin()]);
    }
    for i in 0..sides {
        let a = 1 + i;
        let b = 1 + (i + 1) % sides;
        mesh.triangles.push([0, a, b]);
        mesh.boundary_edges.push(BoundaryEdge {
            vertices: [a, b],
            tag: format!("s{i}"),
        });
    }
    mesh
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generated_meshes_validate() {
        unit_square(1).validate().unwrap();
        unit_square(5).validate().unwrap();
        rectangle(2.0, 1.0, 4, 3).validate().unwrap();
        l_shape(1).validate().unwrap();
        l_shape(3).validate().unwrap();
        disk_polygon(1.0, 12).validate().unwrap();
    }

    #[test]
    fn l_shape_counts() {
        let m = l_shape(2);
        assert_eq!(m.triangles.len(), 2 * 3 * 4);
        assert_eq!(m.boundary_edges.len(), 8 * 2);
    }
}
