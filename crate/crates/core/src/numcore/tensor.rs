use std::cell::{Cell, Ref, RefCell, RefMut};
use std::collections::HashMap;
use std::fmt;
use std::rc::Rc;

use super::scalar::Scalar;
use crate::error::{Error, Result};

thread_local! {
    static GRAD_ENABLED: Cell<bool> = const { Cell::new(true) };
}

/// Runs `f` without recording a computation graph.
///
/// Outputs produced inside the closure are constants: they carry no
/// backward function and hold no references to their inputs.
pub fn no_grad<R>(f: impl FnOnce() -> R) -> R {
    struct Restore(bool);
    impl Drop for Restore {
        fn drop(&mut self) {
            GRAD_ENABLED.with(|g| g.set(self.0));
        }
    }
    let _restore = Restore(GRAD_ENABLED.with(|g| g.replace(false)));
    f()
}

pub fn grad_enabled() -> bool {
    GRAD_ENABLED.with(|g| g.get())
}

/// Everything a backward function may look at.
pub struct BackwardCtx<'a, T: Scalar> {
    /// Upstream gradient, same length as the output.
    pub grad: &'a [T],
    /// Forward output values.
    pub output: &'a [T],
    pub inputs: &'a [Tensor<T>],
    /// `needs[i]` is false when input `i` does not participate in
    /// differentiation; its slot may then be `None`.
    pub needs: &'a [bool],
}

pub(crate) type BackwardFn<T> = Box<dyn Fn(&BackwardCtx<'_, T>) -> Vec<Option<Vec<T>>>>;

struct Node<T: Scalar> {
    shape: Vec<usize>,
    data: RefCell<Vec<T>>,
    grad: RefCell<Option<Vec<T>>>,
    requires_grad: Cell<bool>,
    /// True for nodes produced by a differentiable op.
    is_op: bool,
    consumed: Cell<bool>,
    inputs: RefCell<Vec<Tensor<T>>>,
    backward: RefCell<Option<BackwardFn<T>>>,
}

impl<T: Scalar> Drop for Node<T> {
    // Long recurrent graphs would otherwise recurse once per node on drop.
    fn drop(&mut self) {
        let mut stack = std::mem::take(self.inputs.get_mut());
        while let Some(t) = stack.pop() {
            if let Ok(mut node) = Rc::try_unwrap(t.0) {
                stack.append(node.inputs.get_mut());
                node.backward.get_mut().take();
            }
        }
    }
}

/// Dense n-dimensional array taking part in reverse-mode differentiation.
///
/// Cloning is cheap and shares storage.
pub struct Tensor<T: Scalar = f32>(Rc<Node<T>>);

impl<T: Scalar> Clone for Tensor<T> {
    fn clone(&self) -> Self {
        Tensor(Rc::clone(&self.0))
    }
}

impl<T: Scalar> fmt::Debug for Tensor<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let data = self.data();
        let preview: Vec<T> = data.iter().take(8).copied().collect();
        f.debug_struct("Tensor")
            .field("shape", &self.0.shape)
            .field("requires_grad", &self.requires_grad())
            .field("values", &preview)
            .finish()
    }
}

impl<T: Scalar> Tensor<T> {
    fn make(shape: Vec<usize>, data: Vec<T>, requires_grad: bool) -> Self {
        Tensor(Rc::new(Node {
            shape,
            data: RefCell::new(data),
            grad: RefCell::new(None),
            requires_grad: Cell::new(requires_grad),
            is_op: false,
            consumed: Cell::new(false),
            inputs: RefCell::new(Vec::new()),
            backward: RefCell::new(None),
        }))
    }

    /// Builds a constant tensor, checking that `data` fills `shape`.
    pub fn new(data: Vec<T>, shape: &[usize]) -> Result<Self> {
        let expected: usize = shape.iter().product();
        if expected != data.len() {
            return Err(Error::shape("Tensor::new", &[expected], &[data.len()]));
        }
        if shape.contains(&0) {
            return Err(Error::invalid(format!("zero extent in shape {shape:?}")));
        }
        Ok(Self::make(shape.to_vec(), data, false))
    }

    /// A leaf that accumulates gradients.
    pub fn param(data: Vec<T>, shape: &[usize]) -> Result<Self> {
        let t = Self::new(data, shape)?;
        t.0.requires_grad.set(true);
        Ok(t)
    }

    pub fn zeros(shape: &[usize]) -> Self {
        let n = shape.iter().product();
        Self::make(shape.to_vec(), vec![T::zero(); n], false)
    }

    pub fn full(shape: &[usize], value: T) -> Self {
        let n = shape.iter().product();
        Self::make(shape.to_vec(), vec![value; n], false)
    }

    pub fn scalar(value: T) -> Self {
        Self::make(vec![1], vec![value], false)
    }

    /// Records the result of a differentiable op.
    ///
    /// When gradient recording is disabled or no input requires a gradient
    /// the output is a plain constant.
    pub(crate) fn from_op(
        shape: Vec<usize>,
        data: Vec<T>,
        inputs: Vec<Tensor<T>>,
        backward: BackwardFn<T>,
    ) -> Self {
        debug_assert_eq!(shape.iter().product::<usize>(), data.len());
        let tracked = grad_enabled() && inputs.iter().any(|t| t.requires_grad());
        if !tracked {
            return Self::make(shape, data, false);
        }
        Tensor(Rc::new(Node {
            shape,
            data: RefCell::new(data),
            grad: RefCell::new(None),
            requires_grad: Cell::new(true),
            is_op: true,
            consumed: Cell::new(false),
            inputs: RefCell::new(inputs),
            backward: RefCell::new(Some(backward)),
        }))
    }

    pub fn shape(&self) -> &[usize] {
        &self.0.shape
    }

    pub fn ndim(&self) -> usize {
        self.0.shape.len()
    }

    pub fn numel(&self) -> usize {
        self.0.shape.iter().product()
    }

    pub fn data(&self) -> Ref<'_, Vec<T>> {
        self.0.data.borrow()
    }

    /// Mutable access to the stored values. Only leaves should be edited
    /// (optimizer steps, checkpoint loading, running statistics).
    pub fn data_mut(&self) -> RefMut<'_, Vec<T>> {
        self.0.data.borrow_mut()
    }

    pub fn to_vec(&self) -> Vec<T> {
        self.0.data.borrow().clone()
    }

    /// Value of a one-element tensor.
    pub fn item(&self) -> T {
        let d = self.data();
        assert_eq!(d.len(), 1, "item() on tensor with shape {:?}", self.shape());
        d[0]
    }

    pub fn requires_grad(&self) -> bool {
        self.0.requires_grad.get()
    }

    pub fn is_leaf(&self) -> bool {
        !self.0.is_op
    }

    /// Switches gradient accumulation for a leaf.
    pub fn set_requires_grad(&self, on: bool) {
        assert!(self.is_leaf(), "requires_grad can only be toggled on leaves");
        self.0.requires_grad.set(on);
        if !on {
            self.0.grad.borrow_mut().take();
        }
    }

    pub fn grad(&self) -> Option<Vec<T>> {
        self.0.grad.borrow().clone()
    }

    /// Gradient, or zeros when none has been accumulated.
    pub fn grad_or_zeros(&self) -> Vec<T> {
        self.grad().unwrap_or_else(|| vec![T::zero(); self.numel()])
    }

    pub(crate) fn grad_ref(&self) -> Ref<'_, Option<Vec<T>>> {
        self.0.grad.borrow()
    }

    /// Resets the accumulated gradient to zeros.
    pub fn zero_grad(&self) {
        *self.0.grad.borrow_mut() = Some(vec![T::zero(); self.numel()]);
    }

    pub fn clear_grad(&self) {
        self.0.grad.borrow_mut().take();
    }

    /// A constant copy cut from the graph.
    pub fn detach(&self) -> Self {
        Self::make(self.0.shape.clone(), self.to_vec(), false)
    }

    /// Identity of the underlying storage.
    pub fn ptr_eq(&self, other: &Tensor<T>) -> bool {
        Rc::ptr_eq(&self.0, &other.0)
    }

    fn key(&self) -> *const Node<T> {
        Rc::as_ptr(&self.0)
    }

    /// Back-propagates from a scalar and accumulates into every reachable
    /// leaf that requires a gradient.
    ///
    /// The graph is released afterwards; calling `backward` again on the same
    /// output fails with [`Error::GraphConsumed`].
    pub fn backward(&self) -> Result<()> {
        if self.numel() != 1 {
            return Err(Error::NonScalarLoss(self.shape().to_vec()));
        }
        if self.0.consumed.get() {
            return Err(Error::GraphConsumed);
        }
        if !self.0.is_op {
            if self.requires_grad() {
                self.accumulate(&[T::one()]);
            }
            self.0.consumed.set(true);
            return Ok(());
        }

        // Iterative post-order DFS over op nodes.
        let mut order: Vec<Tensor<T>> = Vec::new();
        let mut visited: HashMap<*const Node<T>, ()> = HashMap::new();
        let mut stack: Vec<(Tensor<T>, bool)> = vec![(self.clone(), false)];
        while let Some((t, expanded)) = stack.pop() {
            if expanded {
                order.push(t);
                continue;
            }
            if visited.insert(t.key(), ()).is_some() {
                continue;
            }
            if t.0.consumed.get() || t.0.backward.borrow().is_none() {
                return Err(Error::GraphConsumed);
            }
            stack.push((t.clone(), true));
            for input in t.0.inputs.borrow().iter() {
                if input.0.is_op && input.requires_grad() && !visited.contains_key(&input.key()) {
                    stack.push((input.clone(), false));
                }
            }
        }

        let mut grads: HashMap<*const Node<T>, Vec<T>> = HashMap::new();
        grads.insert(self.key(), vec![T::one()]);
        for node in order.iter().rev() {
            let Some(g) = grads.remove(&node.key()) else {
                continue;
            };
            let inputs = node.0.inputs.borrow();
            let needs: Vec<bool> = inputs.iter().map(|t| t.requires_grad()).collect();
            let input_grads = {
                let backward = node.0.backward.borrow();
                let f = backward.as_ref().expect("checked during traversal");
                let output = node.0.data.borrow();
                f(&BackwardCtx {
                    grad: &g,
                    output: &output,
                    inputs: &inputs,
                    needs: &needs,
                })
            };
            debug_assert_eq!(input_grads.len(), inputs.len());
            for ((input, need), ig) in inputs.iter().zip(&needs).zip(input_grads) {
                let (true, Some(ig)) = (*need, ig) else {
                    continue;
                };
                debug_assert_eq!(ig.len(), input.numel());
                if input.0.is_op {
                    match grads.get_mut(&input.key()) {
                        Some(acc) => acc.iter_mut().zip(&ig).for_each(|(a, b)| *a += *b),
                        None => {
                            grads.insert(input.key(), ig);
                        }
                    }
                } else {
                    input.accumulate(&ig);
                }
            }
        }

        for node in &order {
            node.0.backward.borrow_mut().take();
            node.0.consumed.set(true);
        }
        Ok(())
    }

    fn accumulate(&self, g: &[T]) {
        let mut slot = self.0.grad.borrow_mut();
        match slot.as_mut() {
            Some(acc) => acc.iter_mut().zip(g).for_each(|(a, b)| *a += *b),
            None => *slot = Some(g.to_vec()),
        }
    }
}
